"""Pipeline stages: stats, paraphrase, predict, evaluate, passk, linguistics.

Stage outputs are append-only JSONL keyed by (example_id, variant_index) so
interrupted runs resume by skipping keys that already exist.  All JSON is
written with sorted keys and no timestamps; with the mock provider and fixed
seeds every stage output is byte-identical across runs.
"""

from __future__ import annotations

import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .. import linguistics as ling
from ..dataset import (
    DatabaseSchema,
    DatasetExample,
    compute_dataset_stats,
    load_examples,
    load_schemas,
    sample_examples,
)
from ..execution import ExecutionResult, MatchOutcome, execute, execution_match
from ..metrics import (
    BUCKET_KEYS,
    AccuracyReport,
    MetricsError,
    PassAtKInput,
    accuracy,
    adjusted_accuracy,
    bucket_by,
    degradation,
    normalized_error_rate,
    pass_at_k,
)
from ..paraphrase import (
    ParaphraseError,
    ParaphraseSet,
    generate_paraphrases,
    semantic_similarity,
    validate_paraphrases,
)
from ..providers import (
    GenerationRequest,
    NumberedListParseError,
    ProviderError,
    parse_numbered_list,
    render_nl2sql_prompt,
    render_paraphrase_prompt,
)
from ..sqlanalysis import (
    QueryStructure,
    SchemaElementSet,
    SchemaErrorCounts,
    analyze_structure,
    diff_schema_elements,
    extract_schema_elements,
)
from ..sqlast import SqlError
from .config import RunConfig, build_provider

ORIGINAL_VARIANT_INDEX = -1


class StageError(Exception):
    """Fatal stage failure (missing inputs, nothing processed)."""


@dataclass
class StageOutcome:
    processed: int = 0
    skipped: int = 0
    failures: list = None

    def __post_init__(self):
        if self.failures is None:
            self.failures = []

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class EvaluationRecord:
    example_id: str
    variant_index: int  # -1 denotes the original question
    question_text: str
    predicted_sql: str
    gold_sql: str
    outcome: MatchOutcome
    structure: Optional[QueryStructure]
    pred_elements: Optional[SchemaElementSet]
    gold_elements: Optional[SchemaElementSet]
    error_counts: Optional[SchemaErrorCounts]

    def to_json(self) -> str:
        def elements(e: Optional[SchemaElementSet]):
            if e is None:
                return None
            return {
                "columns": sorted(e.columns),
                "tables": sorted(e.tables),
                "unresolved": list(e.unresolved),
            }

        return json.dumps(
            {
                "error_counts": self.error_counts.as_dict() if self.error_counts else None,
                "example_id": self.example_id,
                "gold_elements": elements(self.gold_elements),
                "gold_sql": self.gold_sql,
                "outcome": self.outcome.as_dict(),
                "pred_elements": elements(self.pred_elements),
                "predicted_sql": self.predicted_sql,
                "question_text": self.question_text,
                "structure": self.structure.as_dict() if self.structure else None,
                "variant_index": self.variant_index,
            },
            sort_keys=True,
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "EvaluationRecord":
        data = json.loads(line)

        def elements(d):
            if d is None:
                return None
            return SchemaElementSet(
                tables=frozenset(d["tables"]),
                columns=frozenset(d["columns"]),
                unresolved=tuple(d["unresolved"]),
            )

        structure = None
        if data["structure"] is not None:
            structure = QueryStructure(**data["structure"])
        counts = None
        if data["error_counts"] is not None:
            counts = SchemaErrorCounts(**data["error_counts"])
        return cls(
            example_id=data["example_id"],
            variant_index=data["variant_index"],
            question_text=data["question_text"],
            predicted_sql=data["predicted_sql"],
            gold_sql=data["gold_sql"],
            outcome=MatchOutcome(**data["outcome"]),
            structure=structure,
            pred_elements=elements(data["pred_elements"]),
            gold_elements=elements(data["gold_elements"]),
            error_counts=counts,
        )


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def load_dataset(config: RunConfig) -> tuple[list[DatasetExample], dict[str, DatabaseSchema]]:
    examples = load_examples(config.examples_path, config.dataset_format)
    schemas = load_schemas(config.tables_path, db_root=config.db_root)
    if config.sample_n is not None:
        examples = sample_examples(examples, int(config.sample_n), config.seed)
    return examples, schemas


def _existing_keys(path: Path, key_fields: tuple[str, ...]) -> set:
    keys = set()
    if not path.exists():
        return keys
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            keys.add(tuple(record[k] for k in key_fields))
    return keys


def _append_line(handle, line: str) -> None:
    handle.write(line + "\n")
    handle.flush()


_FENCE = re.compile(r"```(?:sql)?\s*\n(.*?)```", re.IGNORECASE | re.DOTALL)


def extract_sql(text: str) -> str:
    """Pull one SQL statement out of a model reply.

    First fenced block when present, else the text up to the first semicolon
    or the end; surrounding whitespace stripped.
    """
    if not text:
        return ""
    match = _FENCE.search(text)
    if match:
        text = match.group(1)
    else:
        semi = text.find(";")
        if semi >= 0:
            text = text[: semi + 1]
    return text.strip()


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Stage: stats
# ---------------------------------------------------------------------------

def stage_stats(config: RunConfig) -> dict:
    examples, schemas = load_dataset(config)
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        stats = compute_dataset_stats(examples, schemas, joins=config.joins)
    out = stats.as_dict()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / "stats.json").write_text(
        json.dumps(out, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    lines = [
        f"{'#Queries':>10} {'#DB':>5} {'#Tables/DB':>11} {'#Cols/Table':>12} "
        f"{'#Joins/Query':>13} {'#Agg/Query':>11} {'NestDepth':>10}",
        f"{stats.n_queries:>10} {stats.n_dbs:>5} {stats.tables_per_db:>11.2f} "
        f"{stats.cols_per_table:>12.2f} {stats.joins_per_query:>13.2f} "
        f"{stats.aggs_per_query:>11.2f} {stats.nest_depth_per_query:>10.2f}",
    ]
    if stats.n_parse_failures:
        lines.append(f"(excluded {stats.n_parse_failures} unparseable gold queries)")
    (config.output_dir / "stats.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


# ---------------------------------------------------------------------------
# Stage: paraphrase
# ---------------------------------------------------------------------------

def stage_paraphrase(config: RunConfig) -> StageOutcome:
    examples, schemas = load_dataset(config)
    base = config.examples_path.parent
    provider = build_provider(config.provider, config.cache_dir, config_base=base)
    embedder = provider
    if config.embedding_provider is not None:
        embedder = build_provider(config.embedding_provider, config.cache_dir, config_base=base)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "paraphrases.jsonl"
    done = {key[0] for key in _existing_keys(out_path, ("example_id",))}
    outcome = StageOutcome()

    def produce(example: DatasetExample) -> Optional[ParaphraseSet]:
        schema = schemas.get(example.db_id)
        if schema is None:
            raise ParaphraseError(f"example {example.id}: unknown db_id {example.db_id!r}")
        pset = generate_paraphrases(
            example, schema, config.m, provider, temperature=config.paraphrase_temperature
        )
        return validate_paraphrases(pset, example.question, embedder, threshold=config.threshold)

    todo = [ex for ex in examples if ex.id not in done]
    outcome.skipped = len(examples) - len(todo)
    with open(out_path, "a", encoding="utf-8") as handle:
        with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
            for example, result in zip(todo, pool.map(_guarded(produce), todo)):
                if isinstance(result, Exception):
                    outcome.failures.append((example.id, str(result)))
                    _log(f"paraphrase failed for {example.id}: {result}")
                    continue
                _append_line(handle, result.to_json())
                outcome.processed += 1
    if outcome.failures:
        _log(f"paraphrase stage: {len(outcome.failures)} example(s) failed")
    return outcome


def _guarded(fn):
    def wrapper(arg):
        try:
            return fn(arg)
        except (ParaphraseError, ProviderError, SqlError) as exc:
            return exc

    return wrapper


def load_paraphrase_sets(path: Path) -> dict[str, ParaphraseSet]:
    if not path.exists():
        raise StageError(f"paraphrase file not found: {path} (run the paraphrase stage first)")
    sets: dict[str, ParaphraseSet] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                pset = ParaphraseSet.from_json(line)
                sets[pset.example_id] = pset
    return sets


# ---------------------------------------------------------------------------
# Stage: predict
# ---------------------------------------------------------------------------

def stage_predict(config: RunConfig, questions: str) -> StageOutcome:
    """Translate questions to SQL; questions is "originals" or "paraphrases"."""
    if questions not in ("originals", "paraphrases"):
        raise StageError(f"questions must be 'originals' or 'paraphrases', got {questions!r}")
    examples, schemas = load_dataset(config)
    base = config.examples_path.parent
    provider = build_provider(config.provider, config.cache_dir, config_base=base)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    units: list[tuple[str, int, str]] = []  # (example_id, variant_index, question)
    if questions == "originals":
        out_path = config.output_dir / "predictions_originals.jsonl"
        for ex in examples:
            units.append((ex.id, ORIGINAL_VARIANT_INDEX, ex.question))
    else:
        out_path = config.output_dir / "predictions_paraphrases.jsonl"
        psets = load_paraphrase_sets(config.output_dir / "paraphrases.jsonl")
        for ex in examples:
            pset = psets.get(ex.id)
            if pset is None:
                continue
            for index, variant in enumerate(pset.variants):
                if variant.valid:  # validated paraphrases are fed onward
                    units.append((ex.id, index, variant.text))

    done = _existing_keys(out_path, ("example_id", "variant_index"))
    outcome = StageOutcome()
    by_id = {ex.id: ex for ex in examples}

    def predict(unit: tuple[str, int, str]) -> dict:
        example_id, variant_index, question = unit
        schema = schemas[by_id[example_id].db_id]
        prompt = render_nl2sql_prompt(
            schema, question, dialect=config.dialect, template_path=config.nl2sql_template
        )
        request = GenerationRequest(
            prompt=prompt, temperature=config.nl2sql_temperature, n_samples=1
        )
        reply = provider.generate(request)[0]
        sql = extract_sql(reply)
        return {
            "example_id": example_id,
            "predicted_sql": sql,
            "question": question,
            "variant_index": variant_index,
        }

    todo = [u for u in units if (u[0], u[1]) not in done]
    outcome.skipped = len(units) - len(todo)
    with open(out_path, "a", encoding="utf-8") as handle:
        with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
            for unit, result in zip(todo, pool.map(_guarded(predict), todo)):
                if isinstance(result, Exception):
                    outcome.failures.append((f"{unit[0]}#{unit[1]}", str(result)))
                    _log(f"prediction failed for {unit[0]}#{unit[1]}: {result}")
                    continue
                if not result["predicted_sql"]:
                    # Extraction failure counts as a mismatch downstream.
                    _log(f"empty prediction for {unit[0]}#{unit[1]}")
                _append_line(handle, json.dumps(result, sort_keys=True, ensure_ascii=False))
                outcome.processed += 1
    return outcome


def load_predictions(path: Path) -> dict[tuple[str, int], dict]:
    if not path.exists():
        raise StageError(f"prediction file not found: {path} (run the predict stage first)")
    predictions: dict[tuple[str, int], dict] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                record = json.loads(line)
                predictions[(record["example_id"], record["variant_index"])] = record
    return predictions


# ---------------------------------------------------------------------------
# Stage: evaluate
# ---------------------------------------------------------------------------

def _gold_artifacts(example: DatasetExample, schema: DatabaseSchema, config: RunConfig):
    """Structure, elements, execution result, and order-by flag for gold SQL."""
    structure = None
    gold_elements = None
    try:
        structure = analyze_structure(example.gold_sql, joins=config.joins, dialect=config.dialect)
        gold_elements = extract_schema_elements(example.gold_sql, schema, dialect=config.dialect)
    except SqlError as exc:
        _log(f"gold SQL for {example.id} not analyzable: {exc}")
    gold_result = execute(schema.db_file, example.gold_sql, timeout=config.execution_timeout)
    has_order_by = structure.has_order_by if structure else False
    return structure, gold_elements, gold_result, has_order_by


def _evaluate_unit(
    example: DatasetExample,
    schema: DatabaseSchema,
    variant_index: int,
    question: str,
    predicted_sql: str,
    gold_artifacts,
    config: RunConfig,
) -> EvaluationRecord:
    structure, gold_elements, gold_result, has_order_by = gold_artifacts
    pred_result = (
        execute(schema.db_file, predicted_sql, timeout=config.execution_timeout)
        if predicted_sql
        else ExecutionResult(status="sql_error", error_message="empty prediction")
    )
    outcome = execution_match(gold_result, pred_result, has_order_by)
    pred_elements = None
    error_counts = None
    if gold_elements is not None:
        try:
            pred_elements = extract_schema_elements(predicted_sql, schema, dialect=config.dialect)
        except SqlError as exc:
            pred_elements = SchemaElementSet(
                tables=frozenset(), columns=frozenset(), unresolved=(f"parse_error:{exc}",)
            )
        error_counts = diff_schema_elements(pred_elements, gold_elements)
    return EvaluationRecord(
        example_id=example.id,
        variant_index=variant_index,
        question_text=question,
        predicted_sql=predicted_sql,
        gold_sql=example.gold_sql,
        outcome=outcome,
        structure=structure,
        pred_elements=pred_elements,
        gold_elements=gold_elements,
        error_counts=error_counts,
    )


def stage_evaluate(config: RunConfig) -> StageOutcome:
    examples, schemas = load_dataset(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "evaluations.jsonl"

    originals = load_predictions(config.output_dir / "predictions_originals.jsonl")
    paraphrased = load_predictions(config.output_dir / "predictions_paraphrases.jsonl")
    predictions = {**originals, **paraphrased}

    by_example: dict[str, list[tuple[int, dict]]] = {}
    for (example_id, variant_index), record in predictions.items():
        by_example.setdefault(example_id, []).append((variant_index, record))

    units: list[tuple[DatasetExample, int, str, str]] = []
    for ex in examples:
        for variant_index, record in sorted(by_example.get(ex.id, [])):
            units.append((ex, variant_index, record["question"], record["predicted_sql"]))

    done = _existing_keys(out_path, ("example_id", "variant_index"))
    todo = [u for u in units if (u[0].id, u[1]) not in done]
    outcome = StageOutcome()
    outcome.skipped = len(units) - len(todo)

    # Gold artifacts are computed once per example up front so worker threads
    # only read the cache.
    gold_cache: dict[str, tuple] = {}
    todo_ids = {u[0].id for u in todo}
    for example in examples:
        if example.id in todo_ids:
            gold_cache[example.id] = _gold_artifacts(example, schemas[example.db_id], config)

    def evaluate(unit) -> EvaluationRecord:
        example, variant_index, question, predicted_sql = unit
        schema = schemas[example.db_id]
        return _evaluate_unit(
            example, schema, variant_index, question, predicted_sql, gold_cache[example.id], config
        )

    with open(out_path, "a", encoding="utf-8") as handle:
        with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
            for record in pool.map(evaluate, todo):
                _append_line(handle, record.to_json())
                outcome.processed += 1

    records = load_evaluation_records(out_path)
    report = build_evaluation_report(records, config)
    (config.output_dir / "evaluation_report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return outcome


def load_evaluation_records(path: Path) -> list[EvaluationRecord]:
    if not path.exists():
        raise StageError(f"evaluation file not found: {path} (run the evaluate stage first)")
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(EvaluationRecord.from_json(line))
    return records


def _accuracy_or_none(records: list[EvaluationRecord], config: RunConfig) -> Optional[AccuracyReport]:
    try:
        return accuracy(
            [r.outcome for r in records],
            n_resamples=config.bootstrap_resamples,
            seed=config.bootstrap_seed,
        )
    except MetricsError:
        return None


def _ner_section(records: list[EvaluationRecord]) -> dict:
    """Per-category normalized error rates plus a per-query aggregation."""
    categories = ("missing_columns", "extra_columns", "missing_tables", "extra_tables")
    succeeded = [r for r in records if r.outcome.match and r.error_counts is not None]
    failed = [
        r
        for r in records
        if not r.outcome.match and r.outcome.reason != "gold_error" and r.error_counts is not None
    ]

    def mean_count(group: list[EvaluationRecord], category: str) -> float:
        if not group:
            return 0.0
        return sum(getattr(r.error_counts, category) for r in group) / len(group)

    per_category = {}
    ner_values = []
    for category in categories:
        e_true = mean_count(succeeded, category)
        e_false = mean_count(failed, category)
        ner = normalized_error_rate(e_false, e_true)
        per_category[category] = {"e_true": e_true, "e_false": e_false, "ner": ner}
        ner_values.append(ner)

    total_true = sum(r.error_counts.total() for r in succeeded) / len(succeeded) if succeeded else 0.0
    total_false = sum(r.error_counts.total() for r in failed) / len(failed) if failed else 0.0
    return {
        "per_category": per_category,
        "mean_ner": sum(ner_values) / len(ner_values),
        "per_query_ner": normalized_error_rate(total_false, total_true),
        "n_success": len(succeeded),
        "n_failure": len(failed),
    }


def build_evaluation_report(records: list[EvaluationRecord], config: RunConfig) -> dict:
    original_records = [r for r in records if r.variant_index == ORIGINAL_VARIANT_INDEX]
    paraphrase_records = [r for r in records if r.variant_index != ORIGINAL_VARIANT_INDEX]

    acc_orig = _accuracy_or_none(original_records, config)
    acc_para = _accuracy_or_none(paraphrase_records, config)

    delta = None
    adjusted = None
    mean_cs = None
    if acc_orig is not None and acc_para is not None:
        delta = degradation(acc_orig.accuracy, acc_para.accuracy)
    paraphrase_path = config.output_dir / "paraphrases.jsonl"
    if acc_para is not None and paraphrase_path.exists():
        psets = load_paraphrase_sets(paraphrase_path)
        scores = [p.confidence_score for p in psets.values()]
        if scores:
            mean_cs = sum(scores) / len(scores)
            adjusted = list(adjusted_accuracy(acc_para.accuracy, mean_cs))

    buckets: dict = {}
    for key in BUCKET_KEYS:
        if key == "dataset":
            continue
        buckets[key] = {}
        for label, group in (("original", original_records), ("paraphrased", paraphrase_records)):
            grouped = bucket_by(
                [r for r in group if r.structure is not None],
                key,
                n_resamples=config.bootstrap_resamples,
                seed=config.bootstrap_seed,
            )
            buckets[key][label] = {str(b): report.as_dict() for b, report in grouped.items()}

    return {
        "n_records": len(records),
        "accuracy": {
            "original": acc_orig.as_dict() if acc_orig else None,
            "paraphrased": acc_para.as_dict() if acc_para else None,
            "degradation": delta,
            "mean_confidence": mean_cs,
            "adjusted_interval": adjusted,
        },
        "buckets": buckets,
        "schema_errors": {
            "original": _ner_section(original_records),
            "paraphrased": _ner_section(paraphrase_records),
        },
    }


# ---------------------------------------------------------------------------
# Stage: passk
# ---------------------------------------------------------------------------

def stage_passk(
    config: RunConfig,
    direction: str = "nl2sql",
    n_replicas: int = 10,
    ks: Optional[list[int]] = None,
    filter_threshold: Optional[float] = None,
) -> dict:
    if direction not in ("nl2sql", "sql2nl"):
        raise StageError(f"direction must be 'nl2sql' or 'sql2nl', got {direction!r}")
    ks = ks or [1, 2, 5, 10]
    if any(k < 1 or k > n_replicas for k in ks):
        raise StageError(f"every k must be in [1, {n_replicas}]")
    examples, schemas = load_dataset(config)
    base = config.examples_path.parent
    provider = build_provider(config.provider, config.cache_dir, config_base=base)
    embedder = provider
    if config.embedding_provider is not None:
        embedder = build_provider(config.embedding_provider, config.cache_dir, config_base=base)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    def replica_sqls(example: DatasetExample, schema: DatabaseSchema) -> list[str]:
        if direction == "nl2sql":
            prompt = render_nl2sql_prompt(
                schema, example.question, dialect=config.dialect, template_path=config.nl2sql_template
            )
            request = GenerationRequest(
                prompt=prompt, temperature=config.passk_temperature, n_samples=n_replicas
            )
            return [extract_sql(reply) for reply in provider.generate(request)]
        # sql2nl: generate n questions from the gold SQL, translate each once.
        prompt = render_paraphrase_prompt(schema, example.gold_sql, n_replicas)
        request = GenerationRequest(
            prompt=prompt, temperature=config.passk_temperature, n_samples=1
        )
        reply = provider.generate(request)[0]
        try:
            questions = parse_numbered_list(reply, n_replicas)[:n_replicas]
        except NumberedListParseError as exc:
            try:
                questions = parse_numbered_list(reply, exc.found)[:n_replicas] if exc.found else []
            except NumberedListParseError:
                questions = []
        sqls = []
        for question in questions:
            if filter_threshold is not None:
                if semantic_similarity(embedder, question, example.question) < filter_threshold:
                    sqls.append("")  # filtered out; counts as a failed replica
                    continue
            q_prompt = render_nl2sql_prompt(
                schema, question, dialect=config.dialect, template_path=config.nl2sql_template
            )
            q_request = GenerationRequest(
                prompt=q_prompt, temperature=config.nl2sql_temperature, n_samples=1
            )
            sqls.append(extract_sql(provider.generate(q_request)[0]))
        return sqls

    per_example = []

    def run_example(example: DatasetExample) -> dict:
        schema = schemas[example.db_id]
        gold_result = execute(schema.db_file, example.gold_sql, timeout=config.execution_timeout)
        try:
            has_order_by = analyze_structure(example.gold_sql, dialect=config.dialect).has_order_by
        except SqlError:
            has_order_by = False
        sqls = replica_sqls(example, schema)
        c = 0
        for sql in sqls:
            pred_result = (
                execute(schema.db_file, sql, timeout=config.execution_timeout)
                if sql
                else ExecutionResult(status="sql_error", error_message="empty prediction")
            )
            if execution_match(gold_result, pred_result, has_order_by).match:
                c += 1
        return {"c": c, "example_id": example.id, "n": n_replicas}

    with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
        per_example = list(pool.map(run_example, examples))

    table = {
        str(k): sum(pass_at_k(PassAtKInput(n=e["n"], c=e["c"], k=k)) for e in per_example)
        / len(per_example)
        for k in ks
    }
    result = {
        "direction": direction,
        "ks": ks,
        "n_replicas": n_replicas,
        "pass_at_k": table,
        "per_example": per_example,
    }
    (config.output_dir / f"passk_{direction}.json").write_text(
        json.dumps(result, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return result


# ---------------------------------------------------------------------------
# Stage: linguistics
# ---------------------------------------------------------------------------

def stage_linguistics(config: RunConfig) -> dict:
    examples, _ = load_dataset(config)
    psets = load_paraphrase_sets(config.output_dir / "paraphrases.jsonl")
    annotations = None
    if config.annotations_path is not None:
        annotations = ling.load_annotations(config.annotations_path)

    by_id = {ex.id: ex for ex in examples}
    semantic_sims: list[float] = []
    grammar_sims: list[float] = []
    pairs: list[dict] = []
    feature_values = {
        "original": {"length": [], "syntactic_depth": [], "lexical_diversity": []},
        "paraphrased": {"length": [], "syntactic_depth": [], "lexical_diversity": []},
    }
    heuristic_pairs = 0

    for example_id in sorted(psets):
        example = by_id.get(example_id)
        if example is None:
            continue
        pset = psets[example_id]
        orig_annotated, orig_external = ling.annotate(example.question, annotations)
        orig_features = ling.features(orig_annotated)
        feature_values["original"]["length"].append(orig_features.length)
        feature_values["original"]["syntactic_depth"].append(orig_features.syntactic_depth)
        feature_values["original"]["lexical_diversity"].append(orig_features.lexical_diversity)
        for index, variant in enumerate(pset.variants):
            para_annotated, para_external = ling.annotate(variant.text, annotations)
            if not (orig_external and para_external):
                heuristic_pairs += 1
            grammar = ling.grammar_similarity(orig_annotated, para_annotated, config.subtree)
            para_features = ling.features(para_annotated)
            semantic_sims.append(variant.semantic_similarity)
            grammar_sims.append(grammar.s_grammar)
            feature_values["paraphrased"]["length"].append(para_features.length)
            feature_values["paraphrased"]["syntactic_depth"].append(para_features.syntactic_depth)
            feature_values["paraphrased"]["lexical_diversity"].append(
                para_features.lexical_diversity
            )
            pairs.append(
                {
                    "example_id": example_id,
                    "grammar_similarity": grammar.s_grammar,
                    "heuristic_annotation": not (orig_external and para_external),
                    "s_pos": grammar.s_pos,
                    "s_tree": grammar.s_tree,
                    "semantic_similarity": variant.semantic_similarity,
                    "valid": variant.valid,
                    "variant_index": index,
                }
            )

    if not pairs:
        raise StageError("no (original, paraphrase) pairs to analyze")

    def summarize(values: list[float]) -> Optional[dict]:
        if len(values) < 2:
            return None
        summary = ling.summarize_distribution(
            values, n_resamples=config.bootstrap_resamples, seed=config.bootstrap_seed
        )
        return summary.as_dict()

    report = {
        "n_pairs": len(pairs),
        "n_heuristic_annotated_pairs": heuristic_pairs,
        "semantic_similarity": summarize(semantic_sims),
        "grammar_similarity": summarize(grammar_sims),
        "features": {
            side: {name: summarize(vals) for name, vals in sides.items()}
            for side, sides in feature_values.items()
        },
    }

    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    kde_dir = out_dir / "kde"
    kde_dir.mkdir(exist_ok=True)

    def write_kde(name: str, values: list[float]) -> None:
        if len(values) < 2:
            return
        curve = ling.kde_curve(values)
        lines = ["x,density"]
        lines += [f"{x!r},{d!r}" for x, d in curve]
        (kde_dir / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    write_kde("semantic_similarity", semantic_sims)
    write_kde("grammar_similarity", grammar_sims)
    for side in ("original", "paraphrased"):
        for name, values in feature_values[side].items():
            write_kde(f"{name}_{side}", values)

    pair_lines = [
        "example_id,variant_index,semantic_similarity,s_tree,s_pos,grammar_similarity,valid,heuristic_annotation"
    ]
    for p in pairs:
        pair_lines.append(
            f"{p['example_id']},{p['variant_index']},{p['semantic_similarity']!r},"
            f"{p['s_tree']!r},{p['s_pos']!r},{p['grammar_similarity']!r},"
            f"{p['valid']},{p['heuristic_annotation']}"
        )
    (out_dir / "linguistics_pairs.csv").write_text("\n".join(pair_lines) + "\n", encoding="utf-8")
    (out_dir / "linguistics.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return report
