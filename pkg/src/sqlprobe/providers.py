"""Text-generation and embedding providers with prompt templating and caching.

One wire protocol (HTTP JSON, chat-completion shaped, field names
configurable) covers hosted and local model servers; a deterministic mock
carries every desk-scale test and golden run.  Responses are cached in
content-addressed files so interrupted long runs resume without repeating
calls.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import tempfile
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .dataset import DatabaseSchema


class ProviderError(Exception):
    """Base class for provider failures."""


class ProviderAuthError(ProviderError):
    pass


class ProviderTimeoutError(ProviderError):
    pass


class ProviderResponseError(ProviderError):
    pass


class PromptError(Exception):
    """Template rendering failure; names the offending placeholder."""


class NumberedListParseError(ProviderError):
    """Numbered-list reply had fewer items than expected or repeated indices."""

    def __init__(self, message: str, found: int):
        super().__init__(message)
        self.found = found


# ---------------------------------------------------------------------------
# Request / config types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512
    n_samples: int = 1
    model_id: str = "default"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not math.isfinite(self.temperature) or not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be finite and in [0, 2]")


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_id: str = "default"
    api_key_env: Optional[str] = None
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    embed_endpoint: Optional[str] = None
    embed_model_id: Optional[str] = None
    # Field names of the JSON request/response, chat-completion shaped.
    model_field: str = "model"
    messages_field: Optional[str] = "messages"
    prompt_field: str = "prompt"
    temperature_field: str = "temperature"
    max_tokens_field: str = "max_tokens"
    n_field: str = "n"
    response_path: str = "choices.*.message.content"
    embed_input_field: str = "input"
    embed_response_path: str = "data.0.embedding"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class CacheEntry:
    key: str
    value: str
    created_at: float


def canonical_request_string(request: GenerationRequest, sample_index: int) -> str:
    """Stable serialization of one sample of a request; the cache identity."""
    return json.dumps(
        {
            "max_tokens": request.max_tokens,
            "model_id": request.model_id,
            "n_samples": request.n_samples,
            "prompt": request.prompt,
            "sample_index": sample_index,
            "temperature": request.temperature,
        },
        sort_keys=True,
        ensure_ascii=False,
    )


def request_cache_key(request: GenerationRequest, sample_index: int) -> str:
    return sha256_hex(canonical_request_string(request, sample_index))


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Content-addressed response cache
# ---------------------------------------------------------------------------

class ResponseCache:
    """File cache at <dir>/<first 2 hex of key>/<key>.txt.

    Writes go through a temp file and an atomic rename, so concurrent readers
    never observe partial content and concurrent writers of the same key
    settle on one complete value.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.txt"

    def get(self, key: str) -> Optional[str]:
        path = self._path(key)
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None

    def get_entry(self, key: str) -> Optional[CacheEntry]:
        path = self._path(key)
        try:
            value = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        return CacheEntry(key=key, value=value, created_at=path.stat().st_mtime)

    def put(self, key: str, value: str) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".txt")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(value)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class Provider:
    """Interface: generate(request) -> list[str], embed(text) -> unit-ish vector."""

    model_id: str = "default"

    def generate(self, request: GenerationRequest) -> list[str]:
        raise NotImplementedError

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError


class MockProvider(Provider):
    """Deterministic offline provider.

    generate() returns text derived from the digest of the prompt and sample
    index, unless a scripted response is registered for the prompt (scripted
    mode maps the prompt digest to a canned reply, or to a list of replies
    indexed by sample).  embed() returns a pseudo-random unit vector seeded by
    the digest of the text, so identical texts map to identical vectors.
    """

    def __init__(self, embed_dim: int = 32, script: Optional[dict] = None, model_id: str = "mock"):
        self.embed_dim = embed_dim
        self.model_id = model_id
        self.script: dict[str, Union[str, list[str]]] = dict(script or {})
        self.generate_calls = 0
        self.embed_calls = 0

    def script_response(self, prompt: str, response: Union[str, list[str]]) -> None:
        self.script[sha256_hex(prompt)] = response

    @staticmethod
    def load_script(path: Union[str, Path]) -> dict:
        with open(path, encoding="utf-8") as f:
            return json.load(f)

    def generate(self, request: GenerationRequest) -> list[str]:
        self.generate_calls += 1
        digest = sha256_hex(request.prompt)
        scripted = self.script.get(digest)
        out = []
        for i in range(request.n_samples):
            if scripted is None:
                out.append(f"mock:{sha256_hex(request.prompt + chr(0) + str(i))[:16]}")
            elif isinstance(scripted, str):
                out.append(scripted)
            else:
                out.append(scripted[min(i, len(scripted) - 1)])
        return out

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ProviderError("cannot embed empty text")
        self.embed_calls += 1
        seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
        vec = np.random.default_rng(seed).standard_normal(self.embed_dim)
        return vec / np.linalg.norm(vec)


class HttpProvider(Provider):
    """JSON-over-HTTP provider with retries and exponential backoff."""

    def __init__(self, config: ProviderConfig):
        self.config = config
        self.model_id = config.model_id
        self.last_attempts = 0

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env)
            if not key:
                raise ProviderAuthError(
                    f"API key environment variable {self.config.api_key_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, url: str, payload: dict) -> dict:
        import requests

        headers = self._headers()
        attempts = 0
        last_error: Optional[Exception] = None
        for attempt in range(self.config.max_retries + 1):
            attempts += 1
            try:
                response = requests.post(
                    url, json=payload, headers=headers, timeout=self.config.timeout
                )
            except requests.Timeout as exc:
                last_error = exc
            except requests.RequestException as exc:
                last_error = exc
            else:
                if response.status_code in (401, 403):
                    self.last_attempts = attempts
                    raise ProviderAuthError(f"authentication failed (HTTP {response.status_code})")
                if response.status_code >= 500 or response.status_code == 429:
                    last_error = ProviderResponseError(f"HTTP {response.status_code}")
                else:
                    self.last_attempts = attempts
                    if response.status_code != 200:
                        raise ProviderResponseError(
                            f"HTTP {response.status_code}: {response.text[:200]}"
                        )
                    try:
                        return response.json()
                    except ValueError as exc:
                        raise ProviderResponseError(f"non-JSON response: {exc}") from exc
            if attempt < self.config.max_retries:
                time.sleep(self.config.backoff * (2**attempt))
        self.last_attempts = attempts
        if isinstance(last_error, Exception) and "Timeout" in type(last_error).__name__:
            raise ProviderTimeoutError(f"request timed out after {attempts} attempts")
        raise ProviderError(f"request failed after {attempts} attempts: {last_error}")

    def _extract(self, data: dict, path: str, sample_index: int):
        node = data
        for part in path.split("."):
            if part == "*":
                part = str(sample_index)
            if isinstance(node, list):
                try:
                    node = node[int(part)]
                except (IndexError, ValueError) as exc:
                    raise ProviderResponseError(
                        f"response path {path!r} failed at {part!r}"
                    ) from exc
            elif isinstance(node, dict):
                if part not in node:
                    raise ProviderResponseError(f"response path {path!r} failed at {part!r}")
                node = node[part]
            else:
                raise ProviderResponseError(f"response path {path!r} failed at {part!r}")
        return node

    def generate(self, request: GenerationRequest) -> list[str]:
        cfg = self.config
        payload: dict = {
            cfg.model_field: request.model_id if request.model_id != "default" else cfg.model_id,
            cfg.temperature_field: request.temperature,
            cfg.max_tokens_field: request.max_tokens,
            cfg.n_field: request.n_samples,
        }
        if cfg.messages_field:
            payload[cfg.messages_field] = [{"role": "user", "content": request.prompt}]
        else:
            payload[cfg.prompt_field] = request.prompt
        data = self._post(cfg.endpoint, payload)
        texts = []
        for i in range(request.n_samples):
            value = self._extract(data, cfg.response_path, i)
            if not isinstance(value, str):
                raise ProviderResponseError(f"sample {i}: expected text, got {type(value).__name__}")
            texts.append(value)
        return texts

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ProviderError("cannot embed empty text")
        cfg = self.config
        payload = {
            cfg.model_field: cfg.embed_model_id or cfg.model_id,
            cfg.embed_input_field: text,
        }
        data = self._post(cfg.embed_endpoint or cfg.endpoint, payload)
        value = self._extract(data, cfg.embed_response_path, 0)
        try:
            return np.asarray(value, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ProviderResponseError(f"embedding is not a numeric vector: {exc}") from exc


class CachingProvider(Provider):
    """Wraps a provider with the content-addressed response cache.

    Each generated sample is cached under its own key; a fully-cached request
    is served with zero calls to the inner provider.
    """

    def __init__(self, inner: Provider, cache: ResponseCache):
        self.inner = inner
        self.cache = cache
        self.model_id = inner.model_id

    def generate(self, request: GenerationRequest) -> list[str]:
        keys = [request_cache_key(request, i) for i in range(request.n_samples)]
        cached = [self.cache.get(k) for k in keys]
        if all(c is not None for c in cached):
            return cached  # type: ignore[return-value]
        texts = self.inner.generate(request)
        for key, text in zip(keys, texts):
            self.cache.put(key, text)
        return texts

    def embed(self, text: str) -> np.ndarray:
        key = sha256_hex(f"embed\x00{self.model_id}\x00{text}")
        cached = self.cache.get(key)
        if cached is not None:
            return np.asarray(json.loads(cached), dtype=float)
        vec = self.inner.embed(text)
        self.cache.put(key, json.dumps([float(v) for v in vec]))
        return vec


# ---------------------------------------------------------------------------
# Prompt templates
# ---------------------------------------------------------------------------

def _load_template(name: str, override: Optional[Union[str, Path]] = None) -> str:
    if override is not None:
        return Path(override).read_text(encoding="utf-8")
    return resources.files("sqlprobe").joinpath("templates", name).read_text(encoding="utf-8")


def _substitute(template: str, values: dict) -> str:
    try:
        return template.format(**values)
    except KeyError as exc:
        raise PromptError(f"template references unknown placeholder {exc.args[0]!r}") from exc
    except IndexError as exc:
        raise PromptError("template uses positional placeholders; only named ones are supported") from exc


def render_schema_definitions(schema: "DatabaseSchema") -> str:
    """Render a schema as one CREATE TABLE-style block per table."""
    pk_by_table: dict[str, list[str]] = {}
    for ref in schema.primary_keys:
        table, _, column = ref.partition(".")
        pk_by_table.setdefault(table.lower(), []).append(column)
    fk_by_table: dict[str, list[tuple[str, str, str]]] = {}
    for child, parent in schema.foreign_keys:
        child_table, _, child_col = child.partition(".")
        parent_table, _, parent_col = parent.partition(".")
        fk_by_table.setdefault(child_table.lower(), []).append(
            (child_col, parent_table, parent_col)
        )

    blocks = []
    for table in schema.tables:
        lines = [f"CREATE TABLE {table.name} ("]
        body = [f"    {col.name} {col.type}" for col in table.columns]
        for col in pk_by_table.get(table.name.lower(), []):
            body.append(f"    PRIMARY KEY ({col})")
        for child_col, parent_table, parent_col in fk_by_table.get(table.name.lower(), []):
            body.append(f"    FOREIGN KEY ({child_col}) REFERENCES {parent_table}({parent_col})")
        lines.append(",\n".join(body))
        lines.append(");")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def render_paraphrase_prompt(
    schema: "DatabaseSchema",
    sql: str,
    num_queries: int,
    template_path: Optional[Union[str, Path]] = None,
) -> str:
    """Render the paraphrase-generation prompt (template substituted literally)."""
    if num_queries < 1:
        raise ValueError("num_queries must be >= 1")
    template = _load_template("paraphrase.txt", template_path)
    return _substitute(
        template,
        {
            "num_queries": num_queries,
            "schema_definitions": render_schema_definitions(schema),
            "sql_query": sql,
        },
    )


def render_nl2sql_prompt(
    schema: "DatabaseSchema",
    question: str,
    dialect: str = "sqlite",
    template_path: Optional[Union[str, Path]] = None,
) -> str:
    """Render the NL-to-SQL prompt from the default or a user-supplied template."""
    if not question:
        raise ValueError("question must be non-empty")
    template = _load_template("nl2sql.txt", template_path)
    return _substitute(
        template,
        {
            "schema_definitions": render_schema_definitions(schema),
            "question": question,
            "dialect": dialect,
        },
    )


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_NUMBERED_LINE = re.compile(r"^\s*(\d+)\.\s+(.*\S)\s*$")


def parse_numbered_list(text: str, expected_n: int) -> list[str]:
    """Extract "<index>. <content>" lines in ascending index order.

    Preamble or trailing chatter that does not match the pattern is ignored.
    Raises NumberedListParseError when fewer than expected_n items are found
    (carrying the found count) or when an index repeats.
    """
    items: dict[int, str] = {}
    for line in text.splitlines():
        match = _NUMBERED_LINE.match(line)
        if not match:
            continue
        index = int(match.group(1))
        if index in items:
            raise NumberedListParseError(f"duplicate index {index}", found=len(items))
        items[index] = match.group(2).strip()
    if len(items) < expected_n:
        raise NumberedListParseError(
            f"expected {expected_n} items, found {len(items)}", found=len(items)
        )
    return [items[i] for i in sorted(items)]
