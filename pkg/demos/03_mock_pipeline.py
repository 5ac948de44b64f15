"""Full pipeline on the bundled mini dataset with the scripted mock provider.

Builds a canned-response script in which every paraphrase prediction is the
gold SQL except two variants per example, runs every stage through the CLI
entry point, and prints the degradation report. Rerunning produces
byte-identical outputs.
"""

import json
import tempfile
from pathlib import Path

from sqlprobe.dataset import load_examples, load_schemas
from sqlprobe.harness.cli import main as sqlprobe_main
from sqlprobe.providers import render_nl2sql_prompt, render_paraphrase_prompt, sha256_hex

REPO = Path(__file__).resolve().parents[1]
MINI = REPO / "data" / "mini"
M = 10
MISPREDICTED = (3, 7)  # 2 of 10 variants per example -> expected drop 0.20

examples = load_examples(MINI / "dev.json", "spider")
schemas = load_schemas(MINI / "tables.json")

script = {}
for example in examples:
    schema = schemas[example.db_id]
    variants = [f"{example.question} (variant {i + 1})" for i in range(M)]
    reply = "\n".join(f"{i + 1}. {text}" for i, text in enumerate(variants))
    script[sha256_hex(render_paraphrase_prompt(schema, example.gold_sql, M))] = reply
    script[sha256_hex(render_nl2sql_prompt(schema, example.question))] = (
        f"```sql\n{example.gold_sql}\n```"
    )
    for i, text in enumerate(variants):
        sql = "SELECT -987654321" if i in MISPREDICTED else example.gold_sql
        script[sha256_hex(render_nl2sql_prompt(schema, text))] = sql

workdir = Path(tempfile.mkdtemp(prefix="sqlprobe_demo_"))
script_path = workdir / "script.json"
script_path.write_text(json.dumps(script, sort_keys=True), encoding="utf-8")

config = {
    "dataset": {"examples": str(MINI / "dev.json"), "tables": str(MINI / "tables.json"),
                "db_root": str(MINI), "format": "spider"},
    "provider": {"kind": "mock", "script": str(script_path)},
    "m": M,
    # mock embeddings of distinct texts are near-orthogonal; disable the gate
    "threshold": -1.0,
    "output_dir": str(workdir / "out"),
    "bootstrap_resamples": 500,
}
config_path = workdir / "config.json"
config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

for argv in (
    ["stats", "--config", str(config_path)],
    ["paraphrase", "--config", str(config_path)],
    ["predict", "--config", str(config_path), "--questions", "originals"],
    ["predict", "--config", str(config_path), "--questions", "paraphrases"],
    ["evaluate", "--config", str(config_path)],
    ["passk", "--config", str(config_path), "--n-replicas", "2", "--ks", "1,2"],
    ["linguistics", "--config", str(config_path)],
    ["report", "--config", str(config_path)],
):
    code = sqlprobe_main(argv)
    assert code == 0, argv

report = json.loads((workdir / "out" / "evaluation_report.json").read_text())
accuracy = report["accuracy"]
print("\n--- degradation report ---")
print(f"A_orig = {accuracy['original']['accuracy']:.3f}  (n={accuracy['original']['n']})")
print(f"A_para = {accuracy['paraphrased']['accuracy']:.3f}  (n={accuracy['paraphrased']['n']})")
print(f"drop   = {accuracy['degradation']:.3f}")
print(f"adjusted interval = {accuracy['adjusted_interval']}")
print("\naccuracy by join count (paraphrased):")
for bucket, cell in report["buckets"]["join_count"]["paraphrased"].items():
    print(f"  joins={bucket}: {cell['accuracy']:.3f} "
          f"[{cell['ci95'][0]:.3f}, {cell['ci95'][1]:.3f}] (n={cell['n']})")
print(f"\nfull bundle: {workdir / 'out' / 'report'}")
