"""Paraphrase generation, semantic-similarity scoring, and validation.

Each gold SQL yields up to m natural-language variants.  Validation replaces
the human in the loop: every variant is scored by embedding cosine similarity
against the original question, flagged valid when the score clears the
threshold (default 0.6), and the set's confidence score is the mean
similarity over valid variants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dataset import DatabaseSchema, DatasetExample
from .providers import (
    GenerationRequest,
    NumberedListParseError,
    Provider,
    parse_numbered_list,
    render_paraphrase_prompt,
)

DEFAULT_SIMILARITY_THRESHOLD = 0.6


class ParaphraseError(Exception):
    pass


@dataclass(frozen=True)
class ParaphraseVariant:
    text: str
    semantic_similarity: float = 0.0
    valid: bool = False


@dataclass(frozen=True)
class ParaphraseSet:
    example_id: str
    variants: tuple[ParaphraseVariant, ...]
    confidence_score: float = 0.0
    # Generation diagnostics; not part of the serialized contract.
    retry_count: int = 0
    partial: bool = False

    def to_json(self) -> str:
        """Contract serialization: one JSON object, stable key order."""
        return json.dumps(
            {
                "confidence_score": self.confidence_score,
                "example_id": self.example_id,
                "variants": [
                    {
                        "semantic_similarity": v.semantic_similarity,
                        "text": v.text,
                        "valid": v.valid,
                    }
                    for v in self.variants
                ],
            },
            sort_keys=True,
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "ParaphraseSet":
        data = json.loads(line)
        return cls(
            example_id=data["example_id"],
            variants=tuple(
                ParaphraseVariant(
                    text=v["text"],
                    semantic_similarity=v["semantic_similarity"],
                    valid=v["valid"],
                )
                for v in data["variants"]
            ),
            confidence_score=data["confidence_score"],
        )


def generate_paraphrases(
    example: DatasetExample,
    schema: DatabaseSchema,
    m: int,
    provider: Provider,
    temperature: float = 0.5,
    max_tokens: int = 1024,
) -> ParaphraseSet:
    """Ask the provider for m paraphrases of the example's gold SQL.

    One generation call; if the reply parses to fewer than m items the call is
    retried once (as a second sample of the same prompt), after which a
    partial set is returned flagged rather than failing the example.
    """
    if not example.gold_sql.strip():
        raise ParaphraseError(f"example {example.id}: empty gold SQL")
    prompt = render_paraphrase_prompt(schema, example.gold_sql, m)

    def attempt(n_samples: int) -> tuple[list[str], Optional[NumberedListParseError]]:
        request = GenerationRequest(
            prompt=prompt, temperature=temperature, max_tokens=max_tokens, n_samples=n_samples
        )
        reply = provider.generate(request)[n_samples - 1]
        try:
            return parse_numbered_list(reply, m)[:m], None
        except NumberedListParseError as exc:
            # Keep whatever did parse; the caller may accept a partial set.
            try:
                salvaged = parse_numbered_list(reply, exc.found) if exc.found else []
            except NumberedListParseError:
                salvaged = []
            return salvaged[:m], exc

    texts, error = attempt(1)
    retries = 0
    if error is not None:
        retries = 1
        retry_texts, retry_error = attempt(2)
        if len(retry_texts) > len(texts):
            texts, error = retry_texts, retry_error
    if not texts:
        raise ParaphraseError(f"example {example.id}: zero parseable variants")
    return ParaphraseSet(
        example_id=example.id,
        variants=tuple(ParaphraseVariant(text=t) for t in texts),
        retry_count=retries,
        partial=len(texts) < m,
    )


def semantic_similarity(provider: Provider, a: str, b: str) -> float:
    """Cosine similarity of the provider embeddings of two texts."""
    if not a or not b:
        raise ParaphraseError("cannot compare empty text")
    va, vb = provider.embed(a), provider.embed(b)
    na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ParaphraseError("zero-norm embedding")
    return float(np.dot(va, vb) / (na * nb))


def validate_paraphrases(
    pset: ParaphraseSet,
    original_question: str,
    provider: Provider,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> ParaphraseSet:
    """Score variants against the original question and set validity flags.

    The confidence score is the mean similarity of valid variants, clamped to
    [0, 1], and 0 when nothing clears the threshold.  Invalid variants are
    retained with valid=False so full score distributions stay reportable.
    """
    scored = []
    for variant in pset.variants:
        sim = semantic_similarity(provider, variant.text, original_question)
        scored.append(
            ParaphraseVariant(text=variant.text, semantic_similarity=sim, valid=sim >= threshold)
        )
    valid_sims = [v.semantic_similarity for v in scored if v.valid]
    confidence = min(1.0, max(0.0, sum(valid_sims) / len(valid_sims))) if valid_sims else 0.0
    return replace(pset, variants=tuple(scored), confidence_score=confidence)
