"""Consolidated report bundle: one JSON document plus CSV/plot-data files.

The bundle is assembled from prior stage outputs; sections whose stage has
not run are null and noted in the summary.  Nothing in the bundle depends on
wall-clock time, so reruns over unchanged stage outputs are byte-identical.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Optional

from .config import RunConfig

REPORT_SCHEMA_VERSION = 1


def report_schema() -> dict:
    """The published JSON schema for report.json."""
    text = resources.files("sqlprobe").joinpath("harness", "report_schema.json").read_text("utf-8")
    return json.loads(text)


def _read_json(path: Path) -> Optional[dict]:
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _csv_line(values) -> str:
    out = []
    for v in values:
        if isinstance(v, float):
            out.append(repr(v))
        elif v is None:
            out.append("")
        else:
            text = str(v)
            if "," in text or '"' in text:
                text = '"' + text.replace('"', '""') + '"'
            out.append(text)
    return ",".join(out)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [_csv_line(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def stage_report(config: RunConfig) -> dict:
    out = config.output_dir
    report_dir = out / "report"
    tables_dir = report_dir / "tables"
    plots_dir = report_dir / "plots"
    for d in (report_dir, tables_dir, plots_dir):
        d.mkdir(parents=True, exist_ok=True)

    stats = _read_json(out / "stats.json")
    evaluation = _read_json(out / "evaluation_report.json")
    passk_nl2sql = _read_json(out / "passk_nl2sql.json")
    passk_sql2nl = _read_json(out / "passk_sql2nl.json")
    linguistics = _read_json(out / "linguistics.json")

    missing = []
    if stats is None:
        missing.append("stats")
    if evaluation is None:
        missing.append("evaluate")
    if passk_nl2sql is None and passk_sql2nl is None:
        missing.append("passk")
    if linguistics is None:
        missing.append("linguistics")

    passk_section = None
    if passk_nl2sql is not None or passk_sql2nl is not None:
        passk_section = {"nl2sql": passk_nl2sql, "sql2nl": passk_sql2nl}

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config.echo(),
        "seeds": {
            "sample_seed": config.seed,
            "bootstrap_seed": config.bootstrap_seed,
        },
        "summary": {
            "missing_stages": missing,
        },
        "stats": stats,
        "evaluation": evaluation,
        "passk": passk_section,
        "linguistics": linguistics,
    }
    (report_dir / "report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    # CSV tables
    if stats is not None:
        _write_csv(
            tables_dir / "dataset_stats.csv",
            ["metric", "value"],
            [[k, v] for k, v in sorted(stats.items())],
        )
    if evaluation is not None:
        acc = evaluation["accuracy"]
        rows = []
        for label in ("original", "paraphrased"):
            section = acc.get(label)
            if section:
                rows.append(
                    [label, section["n"], section["accuracy"], section["ci95"][0], section["ci95"][1]]
                )
        _write_csv(tables_dir / "accuracy.csv", ["questions", "n", "accuracy", "ci_lo", "ci_hi"], rows)

        for key, sides in evaluation["buckets"].items():
            rows = []
            buckets = sorted(set(sides["original"]) | set(sides["paraphrased"]))
            for bucket in buckets:
                for label in ("original", "paraphrased"):
                    cell = sides[label].get(bucket)
                    if cell:
                        rows.append(
                            [bucket, label, cell["n"], cell["accuracy"], cell["ci95"][0], cell["ci95"][1]]
                        )
            _write_csv(
                tables_dir / f"accuracy_by_{key}.csv",
                [key, "questions", "n", "accuracy", "ci_lo", "ci_hi"],
                rows,
            )
            plot_rows = []
            for bucket in buckets:
                orig = sides["original"].get(bucket)
                para = sides["paraphrased"].get(bucket)
                plot_rows.append(
                    [
                        bucket,
                        orig["accuracy"] if orig else None,
                        (orig["accuracy"] - orig["ci95"][0]) if orig else None,
                        (orig["ci95"][1] - orig["accuracy"]) if orig else None,
                        para["accuracy"] if para else None,
                        (para["accuracy"] - para["ci95"][0]) if para else None,
                        (para["ci95"][1] - para["accuracy"]) if para else None,
                    ]
                )
            _write_csv(
                plots_dir / f"accuracy_by_{key}.csv",
                [
                    key,
                    "original",
                    "original_err_lo",
                    "original_err_hi",
                    "paraphrased",
                    "paraphrased_err_lo",
                    "paraphrased_err_hi",
                ],
                plot_rows,
            )

        ner_rows = []
        for label in ("original", "paraphrased"):
            section = evaluation["schema_errors"][label]
            for category, cell in sorted(section["per_category"].items()):
                ner_rows.append([label, category, cell["e_true"], cell["e_false"], cell["ner"]])
            ner_rows.append([label, "mean", None, None, section["mean_ner"]])
            ner_rows.append([label, "per_query", None, None, section["per_query_ner"]])
        _write_csv(
            tables_dir / "schema_errors.csv",
            ["questions", "category", "e_true", "e_false", "ner"],
            ner_rows,
        )

    if passk_section is not None:
        rows = []
        for direction in ("nl2sql", "sql2nl"):
            section = passk_section.get(direction)
            if section:
                for k in section["ks"]:
                    rows.append([direction, k, section["pass_at_k"][str(k)]])
        _write_csv(tables_dir / "passk.csv", ["direction", "k", "pass_at_k"], rows)

    if linguistics is not None:
        rows = []

        def add_summary(name: str, summary: Optional[dict]) -> None:
            if summary:
                rows.append(
                    [
                        name,
                        summary["mean"],
                        summary["median"],
                        summary["q25"],
                        summary["q75"],
                        summary["min"],
                        summary["max"],
                        summary["ci95_lo"],
                        summary["ci95_hi"],
                    ]
                )

        add_summary("semantic_similarity", linguistics.get("semantic_similarity"))
        add_summary("grammar_similarity", linguistics.get("grammar_similarity"))
        for side, feats in sorted(linguistics.get("features", {}).items()):
            for feat, summary in sorted(feats.items()):
                add_summary(f"{feat}_{side}", summary)
        _write_csv(
            tables_dir / "linguistics.csv",
            ["metric", "mean", "median", "q25", "q75", "min", "max", "ci95_lo", "ci95_hi"],
            rows,
        )

    return report
