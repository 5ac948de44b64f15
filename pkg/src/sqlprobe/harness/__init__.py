"""Pipeline orchestration: configuration, stages, reporting, CLI."""

from .config import ConfigError, ProviderSpec, RunConfig, build_provider, load_config
from .report import REPORT_SCHEMA_VERSION, report_schema, stage_report
from .stages import (
    ORIGINAL_VARIANT_INDEX,
    EvaluationRecord,
    StageError,
    StageOutcome,
    extract_sql,
    load_evaluation_records,
    load_paraphrase_sets,
    load_predictions,
    stage_evaluate,
    stage_linguistics,
    stage_paraphrase,
    stage_passk,
    stage_predict,
    stage_stats,
)

__all__ = [
    "ConfigError",
    "ProviderSpec",
    "RunConfig",
    "build_provider",
    "load_config",
    "REPORT_SCHEMA_VERSION",
    "report_schema",
    "stage_report",
    "ORIGINAL_VARIANT_INDEX",
    "EvaluationRecord",
    "StageError",
    "StageOutcome",
    "extract_sql",
    "load_evaluation_records",
    "load_paraphrase_sets",
    "load_predictions",
    "stage_evaluate",
    "stage_linguistics",
    "stage_paraphrase",
    "stage_passk",
    "stage_predict",
    "stage_stats",
]
