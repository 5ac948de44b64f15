"""Dataset loading and corpus-level structural statistics.

Loads the bundled mini benchmark (Spider-shaped), prints per-example
structure, and reproduces the corpus statistics row the harness reports.
"""

from pathlib import Path

from sqlprobe.dataset import compute_dataset_stats, load_examples, load_schemas, sample_examples
from sqlprobe.sqlanalysis import analyze_structure

MINI = Path(__file__).resolve().parents[1] / "data" / "mini"

examples = load_examples(MINI / "dev.json", "spider")
schemas = load_schemas(MINI / "tables.json")
print(f"loaded {len(examples)} examples over {len(schemas)} databases\n")

print("per-example structure (first five):")
for example in examples[:5]:
    structure = analyze_structure(example.gold_sql)
    print(f"  {example.id:<10} joins={structure.join_count} depth={structure.nest_depth} "
          f"aggs={structure.agg_count}  {example.gold_sql[:60]}")

stats = compute_dataset_stats(examples, schemas)
print("\ncorpus statistics:")
for key, value in stats.as_dict().items():
    print(f"  {key:<22} {value}")

sampled = sample_examples(examples, 5, seed=42)
print("\nseeded 5-example sample (stable across runs):")
for example in sampled:
    print(f"  {example.id}: {example.question}")
