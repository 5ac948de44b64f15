"""Scripted-mock pipeline builders shared by harness and acceptance tests."""

import json
from pathlib import Path

from sqlprobe.dataset import load_examples, load_schemas
from sqlprobe.providers import render_nl2sql_prompt, render_paraphrase_prompt, sha256_hex

MINI_ROOT = Path(__file__).resolve().parents[1] / "data" / "mini"

WRONG_SQL = "SELECT -987654321"


def variant_text(example, index: int) -> str:
    return f"{example.question} (variant {index + 1})"


def build_pipeline_script(
    m: int = 10,
    mispredict_variant_indices: tuple = (),
    dialect: str = "sqlite",
) -> dict:
    """Canned mock responses driving a full deterministic pipeline run.

    Paraphrase prompts yield m numbered variants of the original question;
    NL2SQL prompts yield the gold SQL (fenced), except the listed variant
    indices, which yield an executable-but-wrong statement.
    """
    examples = load_examples(MINI_ROOT / "dev.json", "spider")
    schemas = load_schemas(MINI_ROOT / "tables.json")
    script = {}
    for example in examples:
        schema = schemas[example.db_id]
        paraphrase_prompt = render_paraphrase_prompt(schema, example.gold_sql, m)
        reply = "\n".join(f"{i + 1}. {variant_text(example, i)}" for i in range(m))
        script[sha256_hex(paraphrase_prompt)] = reply

        original_prompt = render_nl2sql_prompt(schema, example.question, dialect=dialect)
        script[sha256_hex(original_prompt)] = f"```sql\n{example.gold_sql}\n```"

        for i in range(m):
            prompt = render_nl2sql_prompt(schema, variant_text(example, i), dialect=dialect)
            sql = WRONG_SQL if i in mispredict_variant_indices else example.gold_sql
            script[sha256_hex(prompt)] = sql
    return script


def write_pipeline_config(
    tmp_path: Path,
    name: str = "run",
    m: int = 10,
    mispredict_variant_indices: tuple = (),
    **config_overrides,
) -> Path:
    """Write a script file + config for a scripted mini-dataset run."""
    script = build_pipeline_script(m=m, mispredict_variant_indices=mispredict_variant_indices)
    script_path = tmp_path / f"{name}_script.json"
    assert not script_path.exists(), f"refusing to overwrite {script_path}"
    script_path.write_text(json.dumps(script, sort_keys=True), encoding="utf-8")

    output_dir = tmp_path / f"{name}_out"
    config = {
        "dataset": {
            "examples": str(MINI_ROOT / "dev.json"),
            "tables": str(MINI_ROOT / "tables.json"),
            "db_root": str(MINI_ROOT),
            "format": "spider",
            "dialect": "sqlite",
        },
        "provider": {"kind": "mock", "embed_dim": 32, "script": str(script_path)},
        "m": m,
        "seed": 0,
        # Mock embeddings of distinct texts are near-orthogonal, so golden
        # runs disable the similarity gate to keep every variant flowing.
        "threshold": -1.0,
        "parallelism": 2,
        "output_dir": str(output_dir),
        "bootstrap_resamples": 200,
    }
    config.update(config_overrides)
    config_path = tmp_path / f"{name}_config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path


def run_cli(*argv) -> int:
    from sqlprobe.harness.cli import main

    return main(list(argv))
