"""Command-line interface.

    sqlprobe stats|paraphrase|predict|evaluate|passk|linguistics|report
             --config <file> [overrides]

Exit codes: 0 on success, 2 when some examples failed but the run completed,
1 on fatal errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..dataset import DatasetError
from ..providers import PromptError, ProviderError
from .config import ConfigError, load_config
from .report import stage_report
from .stages import (
    StageError,
    stage_evaluate,
    stage_linguistics,
    stage_paraphrase,
    stage_passk,
    stage_predict,
    stage_stats,
)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqlprobe",
        description="Robustness evaluation harness for NL2SQL systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON or TOML run configuration")
        p.add_argument("--dataset", help="dataset root (expects dev.json, tables.json, database/)")
        p.add_argument("--m", type=int, help="paraphrases per example")
        p.add_argument("--seed", type=int, help="sampling seed")
        p.add_argument("--threshold", type=float, help="semantic-similarity validity threshold")
        p.add_argument("--provider", choices=["mock", "http"], help="provider kind override")
        p.add_argument("--mock", action="store_true", help="force the deterministic mock provider")
        p.add_argument("--joins", choices=["explicit", "all"], help="join counting mode")
        p.add_argument(
            "--subtree", choices=["internal", "all-tokens"], help="dependency subtree counting mode"
        )
        p.add_argument("--output", help="output directory override")

    add_common(sub.add_parser("stats", help="dataset structural statistics"))
    add_common(sub.add_parser("paraphrase", help="generate and validate paraphrases"))

    predict = sub.add_parser("predict", help="translate questions to SQL")
    add_common(predict)
    predict.add_argument(
        "--questions",
        choices=["originals", "paraphrases"],
        default="originals",
        help="which question set to translate",
    )

    add_common(sub.add_parser("evaluate", help="execute predictions and score them"))

    passk = sub.add_parser("passk", help="replica sampling and Pass@K estimation")
    add_common(passk)
    passk.add_argument("--direction", choices=["nl2sql", "sql2nl"], default="nl2sql")
    passk.add_argument("--n-replicas", type=int, default=10)
    passk.add_argument("--ks", default="1,2,5,10", help="comma-separated K values")
    passk.add_argument(
        "--filter-threshold",
        type=float,
        default=None,
        help="sql2nl only: drop generated questions below this similarity to the original",
    )

    add_common(sub.add_parser("linguistics", help="similarity and feature distributions"))
    add_common(sub.add_parser("report", help="consolidated JSON + CSV report bundle"))
    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    overrides = {
        "dataset_root": args.dataset,
        "m": args.m,
        "seed": args.seed,
        "threshold": args.threshold,
        "provider": args.provider,
        "mock": args.mock,
        "joins": args.joins,
        "subtree": args.subtree,
        "output": args.output,
    }
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL

    try:
        if args.command == "stats":
            stats = stage_stats(config)
            print(json.dumps(stats, sort_keys=True, indent=2))
            return EXIT_OK
        if args.command == "paraphrase":
            outcome = stage_paraphrase(config)
            print(
                f"paraphrase: {outcome.processed} written, {outcome.skipped} skipped, "
                f"{len(outcome.failures)} failed"
            )
            return EXIT_OK if outcome.ok else EXIT_PARTIAL
        if args.command == "predict":
            outcome = stage_predict(config, args.questions)
            print(
                f"predict({args.questions}): {outcome.processed} written, "
                f"{outcome.skipped} skipped, {len(outcome.failures)} failed"
            )
            return EXIT_OK if outcome.ok else EXIT_PARTIAL
        if args.command == "evaluate":
            outcome = stage_evaluate(config)
            print(
                f"evaluate: {outcome.processed} records written, {outcome.skipped} skipped; "
                f"report at {config.output_dir / 'evaluation_report.json'}"
            )
            return EXIT_OK if outcome.ok else EXIT_PARTIAL
        if args.command == "passk":
            ks = [int(k) for k in str(args.ks).split(",") if k.strip()]
            result = stage_passk(
                config,
                direction=args.direction,
                n_replicas=args.n_replicas,
                ks=ks,
                filter_threshold=args.filter_threshold,
            )
            print(json.dumps(result["pass_at_k"], sort_keys=True, indent=2))
            return EXIT_OK
        if args.command == "linguistics":
            report = stage_linguistics(config)
            print(
                f"linguistics: {report['n_pairs']} pairs "
                f"({report['n_heuristic_annotated_pairs']} heuristically annotated)"
            )
            return EXIT_OK
        if args.command == "report":
            report = stage_report(config)
            missing = report["summary"]["missing_stages"]
            print(f"report written to {config.output_dir / 'report' / 'report.json'}")
            if missing:
                print(f"missing stages: {', '.join(missing)}")
            return EXIT_OK
    except (StageError, DatasetError, ConfigError, PromptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
