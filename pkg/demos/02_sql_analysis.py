"""SQL parsing, schema-element extraction, and schema-error diffs.

Walks through what the analyzer sees for a gold query, then diffs a
plausible wrong prediction against it the way the evaluation stage does.
"""

from pathlib import Path

from sqlprobe.dataset import load_schemas
from sqlprobe.sqlanalysis import analyze_structure, diff_schema_elements, extract_schema_elements
from sqlprobe.sqlast import SqlSyntaxError, parse_sql

MINI = Path(__file__).resolve().parents[1] / "data" / "mini"
schema = load_schemas(MINI / "tables.json")["music_fest"]

gold = ("SELECT T3.name FROM concert AS T1 JOIN singer_in_concert AS T2 "
        "ON T1.concert_id = T2.concert_id JOIN singer AS T3 "
        "ON T2.singer_id = T3.singer_id WHERE T1.year = 2019")
print("gold SQL:")
print(f"  {gold}\n")

structure = analyze_structure(gold)
print(f"structure: {structure.as_dict()}\n")

gold_elements = extract_schema_elements(gold, schema)
print("gold schema elements (aliases resolved):")
print(f"  tables:  {sorted(gold_elements.tables)}")
print(f"  columns: {sorted(gold_elements.columns)}\n")

# A prediction that picked the wrong join path and hallucinated a column.
predicted = ("SELECT singer.name FROM singer JOIN concert "
             "ON singer.singer_id = concert.performer_id WHERE concert.year = 2019")
pred_elements = extract_schema_elements(predicted, schema)
print("predicted schema elements:")
print(f"  tables:     {sorted(pred_elements.tables)}")
print(f"  columns:    {sorted(pred_elements.columns)}")
print(f"  unresolved: {list(pred_elements.unresolved)}\n")

counts = diff_schema_elements(pred_elements, gold_elements)
print(f"schema-error counts vs. gold: {counts.as_dict()}\n")

print("star expansion: SELECT * resolves against the schema")
star = extract_schema_elements("SELECT * FROM stadium", schema)
print(f"  {sorted(star.columns)}\n")

try:
    parse_sql("SELEC name FRM singer")
except SqlSyntaxError as err:
    print(f"malformed SQL is reported with its position: {err}")
