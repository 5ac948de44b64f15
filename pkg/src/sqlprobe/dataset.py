"""Benchmark loading (Spider/BIRD/FIBEN record shapes) and corpus statistics.

All loaders normalize to one internal representation: DatasetExample for the
(question, gold SQL, database) triple and DatabaseSchema for the tables file.
Collections are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .sqlanalysis import analyze_structure
from .sqlast import SqlError

DATASET_FORMATS = ("spider", "bird", "fiben")


class DatasetError(Exception):
    """Raised for unreadable, malformed, or inconsistent dataset files."""


@dataclass(frozen=True)
class DatasetExample:
    id: str
    db_id: str
    question: str
    gold_sql: str

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "db_id": self.db_id,
            "question": self.question,
            "gold_sql": self.gold_sql,
        }


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    type: str


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[ColumnSchema, ...]


@dataclass(frozen=True)
class DatabaseSchema:
    db_id: str
    tables: tuple[TableSchema, ...]
    primary_keys: tuple[str, ...] = ()  # "table.column" references
    foreign_keys: tuple[tuple[str, str], ...] = ()
    db_file: Optional[Path] = None

    def table(self, name: str) -> Optional[TableSchema]:
        lower = name.lower()
        for table in self.tables:
            if table.name.lower() == lower:
                return table
        return None

    @property
    def n_tables(self) -> int:
        return len(self.tables)

    @property
    def n_columns(self) -> int:
        return sum(len(t.columns) for t in self.tables)


@dataclass(frozen=True)
class DatasetStats:
    n_queries: int
    n_dbs: int
    tables_per_db: float
    cols_per_table: float
    joins_per_query: float
    aggs_per_query: float
    nest_depth_per_query: float
    n_parse_failures: int = 0

    def as_dict(self) -> dict:
        return {
            "n_queries": self.n_queries,
            "n_dbs": self.n_dbs,
            "tables_per_db": self.tables_per_db,
            "cols_per_table": self.cols_per_table,
            "joins_per_query": self.joins_per_query,
            "aggs_per_query": self.aggs_per_query,
            "nest_depth_per_query": self.nest_depth_per_query,
            "n_parse_failures": self.n_parse_failures,
        }


# ---------------------------------------------------------------------------
# Example loading
# ---------------------------------------------------------------------------

def _require_field(record: dict, index: int, *names: str) -> object:
    for name in names:
        if name in record and record[name] is not None:
            return record[name]
    raise DatasetError(f"record {index}: missing required field {names[0]!r}")


def load_examples(path: Union[str, Path], format: str) -> list[DatasetExample]:
    """Load benchmark examples from a JSON list file.

    Supported record shapes:
      spider: {db_id, question, query}
      bird:   {db_id, question, SQL[, question_id]}
      fiben:  {question, SQL|query[, db_id, id]} with db_id defaulting to "fiben"

    Ids are synthesized as "<format>-<index>" when the source lacks them.
    """
    if format not in DATASET_FORMATS:
        raise DatasetError(f"unknown dataset format: {format!r}")
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, list):
        raise DatasetError(f"{path}: expected a JSON list of records")

    examples: list[DatasetExample] = []
    seen_ids: set[str] = set()
    for i, record in enumerate(data):
        if not isinstance(record, dict):
            raise DatasetError(f"record {i}: expected an object")
        question = str(_require_field(record, i, "question"))
        if format == "spider":
            db_id = str(_require_field(record, i, "db_id"))
            gold_sql = str(_require_field(record, i, "query"))
            raw_id = record.get("id")
        elif format == "bird":
            db_id = str(_require_field(record, i, "db_id"))
            gold_sql = str(_require_field(record, i, "SQL"))
            raw_id = record.get("question_id", record.get("id"))
        else:  # fiben: thin adapter onto the spider record shape
            db_id = str(record.get("db_id", "fiben"))
            gold_sql = str(_require_field(record, i, "SQL", "query", "sql"))
            raw_id = record.get("id", record.get("query id"))
        if not gold_sql.strip():
            raise DatasetError(f"record {i}: empty gold SQL")
        example_id = str(raw_id) if raw_id is not None else f"{format}-{i}"
        if example_id in seen_ids:
            raise DatasetError(f"record {i}: duplicate example id {example_id!r}")
        seen_ids.add(example_id)
        examples.append(
            DatasetExample(id=example_id, db_id=db_id, question=question, gold_sql=gold_sql)
        )
    return examples


# ---------------------------------------------------------------------------
# Schema loading
# ---------------------------------------------------------------------------

def load_schemas(
    path: Union[str, Path], db_root: Optional[Union[str, Path]] = None
) -> dict[str, DatabaseSchema]:
    """Load Spider-style tables.json into a db_id -> DatabaseSchema map.

    Column entries with table index -1 (the "*" pseudo-column) are dropped.
    db_root locates SQLite files at <db_root>/database/<db_id>/<db_id>.sqlite
    and defaults to the tables file's directory.
    """
    path = Path(path)
    root = Path(db_root) if db_root is not None else path.parent
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise DatasetError(f"cannot read tables file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, list):
        raise DatasetError(f"{path}: expected a JSON list of schema entries")

    schemas: dict[str, DatabaseSchema] = {}
    for entry in data:
        db_id = entry["db_id"]
        if db_id in schemas:
            raise DatasetError(f"duplicate db_id {db_id!r} in {path}")
        table_names = entry["table_names_original"]
        lowered = [t.lower() for t in table_names]
        if len(set(lowered)) != len(lowered):
            raise DatasetError(f"{db_id}: table names are not unique case-insensitively")
        column_names = entry["column_names_original"]
        column_types = entry.get("column_types", ["text"] * len(column_names))

        per_table: list[list[ColumnSchema]] = [[] for _ in table_names]
        flat_refs: list[Optional[str]] = []  # column index -> "table.column"
        for idx, (table_idx, col_name) in enumerate(column_names):
            if table_idx == -1:
                flat_refs.append(None)
                continue
            if not 0 <= table_idx < len(table_names):
                raise DatasetError(
                    f"{db_id}: column {col_name!r} references table index {table_idx} "
                    f"but only {len(table_names)} tables exist"
                )
            col_type = column_types[idx] if idx < len(column_types) else "text"
            per_table[table_idx].append(ColumnSchema(name=col_name, type=col_type))
            flat_refs.append(f"{table_names[table_idx]}.{col_name}")

        def ref(col_idx: int) -> str:
            if not 0 <= col_idx < len(flat_refs) or flat_refs[col_idx] is None:
                raise DatasetError(f"{db_id}: key references invalid column index {col_idx}")
            return flat_refs[col_idx]

        primary_keys = tuple(ref(i) for i in entry.get("primary_keys", []))
        foreign_keys = tuple((ref(a), ref(b)) for a, b in entry.get("foreign_keys", []))
        schemas[db_id] = DatabaseSchema(
            db_id=db_id,
            tables=tuple(
                TableSchema(name=name, columns=tuple(cols))
                for name, cols in zip(table_names, per_table)
            ),
            primary_keys=primary_keys,
            foreign_keys=foreign_keys,
            db_file=root / "database" / db_id / f"{db_id}.sqlite",
        )
    return schemas


# ---------------------------------------------------------------------------
# Statistics and sampling
# ---------------------------------------------------------------------------

def compute_dataset_stats(
    examples: list[DatasetExample],
    schemas: dict[str, DatabaseSchema],
    joins: str = "all",
) -> DatasetStats:
    """Average structural complexity over a dataset (Table-1-style row).

    Gold SQL that fails to parse is excluded from the per-query averages and
    counted in n_parse_failures; schema averages run over the distinct
    databases referenced by the examples.
    """
    if not examples:
        raise DatasetError("empty dataset")
    referenced: list[str] = []
    for ex in examples:
        if ex.db_id not in schemas:
            raise DatasetError(f"example {ex.id}: db_id {ex.db_id!r} has no loaded schema")
        if ex.db_id not in referenced:
            referenced.append(ex.db_id)

    join_counts: list[int] = []
    agg_counts: list[int] = []
    depths: list[int] = []
    failures = 0
    for ex in examples:
        try:
            structure = analyze_structure(ex.gold_sql, joins=joins)
        except SqlError as exc:
            failures += 1
            warnings.warn(f"example {ex.id}: gold SQL not parseable ({exc})", stacklevel=2)
            continue
        join_counts.append(structure.join_count)
        agg_counts.append(structure.agg_count)
        depths.append(structure.nest_depth)
    if not join_counts:
        raise DatasetError("no parseable gold SQL in dataset")

    dbs = [schemas[db_id] for db_id in referenced]
    total_tables = sum(db.n_tables for db in dbs)
    total_columns = sum(db.n_columns for db in dbs)
    n = len(join_counts)
    return DatasetStats(
        n_queries=len(examples),
        n_dbs=len(dbs),
        tables_per_db=total_tables / len(dbs),
        cols_per_table=(total_columns / total_tables) if total_tables else 0.0,
        joins_per_query=sum(join_counts) / n,
        aggs_per_query=sum(agg_counts) / n,
        nest_depth_per_query=sum(depths) / n,
        n_parse_failures=failures,
    )


def sample_examples(examples: list[DatasetExample], n: int, seed: int) -> list[DatasetExample]:
    """Uniform sample without replacement; deterministic for a fixed seed."""
    if n > len(examples):
        raise DatasetError(f"cannot sample {n} from {len(examples)} examples")
    return random.Random(seed).sample(examples, n)
