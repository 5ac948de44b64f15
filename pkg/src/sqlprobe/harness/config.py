"""Run configuration: file loading, validation, and provider construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..providers import CachingProvider, HttpProvider, MockProvider, Provider, ProviderConfig, ResponseCache


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ProviderSpec:
    kind: str = "mock"  # mock | http
    model_id: str = "mock"
    endpoint: Optional[str] = None
    api_key_env: Optional[str] = None
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    embed_dim: int = 32
    script: Optional[str] = None  # path to a {prompt_digest: response|[responses]} JSON
    embed_endpoint: Optional[str] = None
    embed_model_id: Optional[str] = None
    wire: dict = field(default_factory=dict)  # overrides for ProviderConfig field names


@dataclass(frozen=True)
class RunConfig:
    examples_path: Path
    tables_path: Path
    db_root: Path
    dataset_format: str = "spider"
    dialect: str = "sqlite"
    provider: ProviderSpec = field(default_factory=ProviderSpec)
    embedding_provider: Optional[ProviderSpec] = None
    m: int = 10
    sample_n: Optional[int] = None
    seed: int = 0
    threshold: float = 0.6
    execution_timeout: float = 30.0
    parallelism: int = 4
    output_dir: Path = Path("out")
    cache_dir: Optional[Path] = None
    joins: str = "all"
    subtree: str = "internal"
    paraphrase_temperature: float = 0.5
    nl2sql_temperature: float = 0.0
    passk_temperature: float = 0.5
    nl2sql_template: Optional[Path] = None
    annotations_path: Optional[Path] = None
    bootstrap_resamples: int = 1000
    bootstrap_seed: int = 0

    def validate(self) -> None:
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.dataset_format not in ("spider", "bird", "fiben"):
            raise ConfigError(f"unknown dataset format {self.dataset_format!r}")
        if self.joins not in ("all", "explicit"):
            raise ConfigError(f"joins must be 'all' or 'explicit', got {self.joins!r}")
        if self.subtree not in ("internal", "all-tokens"):
            raise ConfigError(f"subtree must be 'internal' or 'all-tokens', got {self.subtree!r}")
        for label, path in (("examples", self.examples_path), ("tables", self.tables_path)):
            if not Path(path).exists():
                raise ConfigError(f"{label} path does not exist: {path}")

    def echo(self) -> dict:
        """JSON-serializable snapshot of the effective configuration."""

        def spec_dict(spec: Optional[ProviderSpec]):
            if spec is None:
                return None
            return {
                "kind": spec.kind,
                "model_id": spec.model_id,
                "endpoint": spec.endpoint,
                "api_key_env": spec.api_key_env,
                "timeout": spec.timeout,
                "max_retries": spec.max_retries,
                "backoff": spec.backoff,
                "embed_dim": spec.embed_dim,
                "script": spec.script,
            }

        return {
            "dataset": {
                "examples": str(self.examples_path),
                "tables": str(self.tables_path),
                "db_root": str(self.db_root),
                "format": self.dataset_format,
                "dialect": self.dialect,
            },
            "provider": spec_dict(self.provider),
            "embedding_provider": spec_dict(self.embedding_provider),
            "m": self.m,
            "sample_n": self.sample_n,
            "seed": self.seed,
            "threshold": self.threshold,
            "execution_timeout": self.execution_timeout,
            "parallelism": self.parallelism,
            "output_dir": str(self.output_dir),
            "cache_dir": str(self.cache_dir) if self.cache_dir else None,
            "joins": self.joins,
            "subtree": self.subtree,
            "temperatures": {
                "paraphrase": self.paraphrase_temperature,
                "nl2sql": self.nl2sql_temperature,
                "passk": self.passk_temperature,
            },
            "nl2sql_template": str(self.nl2sql_template) if self.nl2sql_template else None,
            "annotations": str(self.annotations_path) if self.annotations_path else None,
            "bootstrap_resamples": self.bootstrap_resamples,
            "bootstrap_seed": self.bootstrap_seed,
        }


def _load_config_data(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _provider_spec(data: Optional[dict]) -> Optional[ProviderSpec]:
    if data is None:
        return None
    known = {f for f in ProviderSpec.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown provider config keys: {sorted(unknown)}")
    return ProviderSpec(**data)


def load_config(path: Union[str, Path], overrides: Optional[dict] = None) -> RunConfig:
    """Load a JSON or TOML config file and apply CLI overrides."""
    path = Path(path)
    try:
        data = _load_config_data(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    overrides = overrides or {}

    base = path.parent

    def resolve(value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    dataset = data.get("dataset", {})
    if "dataset_root" in overrides and overrides["dataset_root"]:
        root = Path(overrides["dataset_root"])
        dataset = {
            "examples": str(root / "dev.json"),
            "tables": str(root / "tables.json"),
            "db_root": str(root),
            "format": dataset.get("format", "spider"),
            "dialect": dataset.get("dialect", "sqlite"),
        }
        base = Path.cwd()

    for key in ("examples", "tables"):
        if key not in dataset:
            raise ConfigError(f"config is missing dataset.{key}")

    provider = _provider_spec(data.get("provider")) or ProviderSpec()
    if overrides.get("mock"):
        provider = ProviderSpec(kind="mock", embed_dim=provider.embed_dim, script=provider.script)
    elif overrides.get("provider"):
        provider = ProviderSpec(**{**provider.__dict__, "kind": overrides["provider"]})

    temperatures = data.get("temperatures", {})
    timeouts = data.get("timeouts", {})
    config = RunConfig(
        examples_path=resolve(dataset["examples"]),
        tables_path=resolve(dataset["tables"]),
        db_root=resolve(dataset.get("db_root")) or resolve(dataset["tables"]).parent,
        dataset_format=dataset.get("format", "spider"),
        dialect=dataset.get("dialect", "sqlite"),
        provider=provider,
        embedding_provider=_provider_spec(data.get("embedding_provider")),
        m=int(overrides.get("m") or data.get("m", 10)),
        sample_n=overrides.get("sample_n") or data.get("sample_n"),
        seed=int(overrides["seed"] if overrides.get("seed") is not None else data.get("seed", 0)),
        threshold=float(
            overrides["threshold"]
            if overrides.get("threshold") is not None
            else data.get("threshold", 0.6)
        ),
        execution_timeout=float(timeouts.get("execution", 30.0)),
        parallelism=int(data.get("parallelism", 4)),
        output_dir=resolve(overrides.get("output") or data.get("output_dir", "out")),
        cache_dir=resolve(data.get("cache_dir")),
        joins=overrides.get("joins") or data.get("joins", "all"),
        subtree=overrides.get("subtree") or data.get("subtree", "internal"),
        paraphrase_temperature=float(temperatures.get("paraphrase", 0.5)),
        nl2sql_temperature=float(temperatures.get("nl2sql", 0.0)),
        passk_temperature=float(temperatures.get("passk", 0.5)),
        nl2sql_template=resolve(data.get("nl2sql_template")),
        annotations_path=resolve(data.get("annotations")),
        bootstrap_resamples=int(data.get("bootstrap_resamples", 1000)),
        bootstrap_seed=int(data.get("bootstrap_seed", data.get("seed", 0))),
    )
    config.validate()
    return config


def build_provider(spec: ProviderSpec, cache_dir: Optional[Path], config_base: Optional[Path] = None) -> Provider:
    """Construct the provider named by a spec, optionally wrapped in the cache."""
    if spec.kind == "mock":
        script = None
        if spec.script:
            script_path = Path(spec.script)
            if not script_path.is_absolute() and config_base is not None:
                script_path = config_base / script_path
            script = MockProvider.load_script(script_path)
        provider: Provider = MockProvider(
            embed_dim=spec.embed_dim, script=script, model_id=spec.model_id
        )
    elif spec.kind == "http":
        if not spec.endpoint:
            raise ConfigError("http provider requires an endpoint")
        provider = HttpProvider(
            ProviderConfig(
                endpoint=spec.endpoint,
                model_id=spec.model_id,
                api_key_env=spec.api_key_env,
                timeout=spec.timeout,
                max_retries=spec.max_retries,
                backoff=spec.backoff,
                embed_endpoint=spec.embed_endpoint,
                embed_model_id=spec.embed_model_id,
                **spec.wire,
            )
        )
    else:
        raise ConfigError(f"unknown provider kind {spec.kind!r}")
    if cache_dir is not None:
        provider = CachingProvider(provider, ResponseCache(cache_dir))
    return provider
