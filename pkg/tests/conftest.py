import json
from pathlib import Path

import pytest

from sqlprobe.dataset import ColumnSchema, DatabaseSchema, TableSchema, load_examples, load_schemas

REPO_ROOT = Path(__file__).resolve().parents[1]
MINI_ROOT = REPO_ROOT / "data" / "mini"


@pytest.fixture(scope="session")
def mini_root() -> Path:
    return MINI_ROOT


@pytest.fixture(scope="session")
def mini_examples():
    return load_examples(MINI_ROOT / "dev.json", "spider")


@pytest.fixture(scope="session")
def mini_schemas():
    return load_schemas(MINI_ROOT / "tables.json")


@pytest.fixture(scope="session")
def music_schema(mini_schemas) -> DatabaseSchema:
    return mini_schemas["music_fest"]


@pytest.fixture(scope="session")
def campus_schema(mini_schemas) -> DatabaseSchema:
    return mini_schemas["campus"]


@pytest.fixture()
def singer_schema() -> DatabaseSchema:
    """Tiny standalone schema for hand-traced fixtures."""
    return DatabaseSchema(
        db_id="concert_singer",
        tables=(
            TableSchema(
                "singer",
                (
                    ColumnSchema("singer_id", "number"),
                    ColumnSchema("id", "number"),
                    ColumnSchema("name", "text"),
                    ColumnSchema("age", "number"),
                ),
            ),
            TableSchema(
                "concert",
                (
                    ColumnSchema("concert_id", "number"),
                    ColumnSchema("singer_id", "number"),
                    ColumnSchema("year", "number"),
                ),
            ),
        ),
        primary_keys=("singer.singer_id", "concert.concert_id"),
        foreign_keys=(("concert.singer_id", "singer.singer_id"),),
    )


def write_config(path: Path, output_dir: Path, **overrides) -> Path:
    """Write a mini-dataset run config pointing at a private output dir."""
    config = {
        "dataset": {
            "examples": str(MINI_ROOT / "dev.json"),
            "tables": str(MINI_ROOT / "tables.json"),
            "db_root": str(MINI_ROOT),
            "format": "spider",
            "dialect": "sqlite",
        },
        "provider": {"kind": "mock", "embed_dim": 32},
        "m": 10,
        "seed": 0,
        "threshold": 0.6,
        "parallelism": 2,
        "output_dir": str(output_dir),
        "bootstrap_resamples": 200,
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key].update(value)
        else:
            config[key] = value
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path
