import math

import numpy as np
import pytest

from sqlprobe.paraphrase import (
    ParaphraseError,
    ParaphraseSet,
    ParaphraseVariant,
    generate_paraphrases,
    semantic_similarity,
    validate_paraphrases,
)
from sqlprobe.providers import MockProvider, render_paraphrase_prompt


class VectorProvider(MockProvider):
    """Mock whose embeddings come from a hand-set map."""

    def __init__(self, vectors):
        super().__init__()
        self.vectors = vectors

    def embed(self, text):
        if text in self.vectors:
            return np.asarray(self.vectors[text], dtype=float)
        return super().embed(text)


def numbered(texts):
    return "\n".join(f"{i + 1}. {t}" for i, t in enumerate(texts))


@pytest.fixture()
def example(mini_examples):
    return mini_examples[0]  # "How many singers do we have?"


class TestGenerate:
    def test_scripted_ten_variants(self, example, music_schema):
        provider = MockProvider()
        prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 10)
        provider.script_response(prompt, numbered([f"Question {i}?" for i in range(10)]))
        pset = generate_paraphrases(example, music_schema, 10, provider)
        assert len(pset.variants) == 10
        assert pset.retry_count == 0
        assert pset.partial is False
        assert pset.example_id == example.id

    def test_partial_reply_then_full_retry(self, example, music_schema):
        provider = MockProvider()
        prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 10)
        provider.script_response(
            prompt,
            [
                numbered([f"Only {i}?" for i in range(8)]),
                numbered([f"Retry {i}?" for i in range(10)]),
            ],
        )
        pset = generate_paraphrases(example, music_schema, 10, provider)
        assert len(pset.variants) == 10
        assert pset.retry_count == 1
        assert pset.variants[0].text == "Retry 0?"

    def test_partial_both_attempts_returns_flagged_set(self, example, music_schema):
        provider = MockProvider()
        prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 10)
        provider.script_response(prompt, numbered(["Q1?", "Q2?", "Q3?"]))
        pset = generate_paraphrases(example, music_schema, 10, provider)
        assert len(pset.variants) == 3
        assert pset.partial is True
        assert pset.retry_count == 1

    def test_garbage_both_attempts_is_error(self, example, music_schema):
        provider = MockProvider()
        prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 10)
        provider.script_response(prompt, "no numbered list here at all")
        with pytest.raises(ParaphraseError, match="zero"):
            generate_paraphrases(example, music_schema, 10, provider)

    def test_extra_items_truncated_to_m(self, example, music_schema):
        provider = MockProvider()
        prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 3)
        provider.script_response(prompt, numbered([f"Q{i}?" for i in range(6)]))
        pset = generate_paraphrases(example, music_schema, 3, provider)
        assert len(pset.variants) == 3


class TestSimilarity:
    def test_identical_texts(self):
        provider = MockProvider()
        assert semantic_similarity(provider, "same text", "same text") == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_vectors(self):
        provider = VectorProvider({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        assert semantic_similarity(provider, "a", "b") == pytest.approx(0.0, abs=1e-9)

    def test_hand_cosine(self):
        provider = VectorProvider({"u": [1.0, 0.0], "v": [1 / math.sqrt(2), 1 / math.sqrt(2)]})
        assert semantic_similarity(provider, "u", "v") == pytest.approx(math.sqrt(2) / 2, abs=1e-12)

    def test_symmetry(self):
        provider = MockProvider()
        pairs = [("alpha beta", "gamma"), ("how many", "count of"), ("x", "y")]
        for a, b in pairs:
            assert semantic_similarity(provider, a, b) == pytest.approx(
                semantic_similarity(provider, b, a), abs=1e-12
            )

    def test_zero_norm_rejected(self):
        provider = VectorProvider({"z": [0.0, 0.0], "w": [1.0, 0.0]})
        with pytest.raises(ParaphraseError, match="zero-norm"):
            semantic_similarity(provider, "z", "w")

    def test_empty_text_rejected(self):
        with pytest.raises(ParaphraseError):
            semantic_similarity(MockProvider(), "", "x")


class TestValidate:
    def make_set(self, texts):
        return ParaphraseSet(
            example_id="e", variants=tuple(ParaphraseVariant(text=t) for t in texts)
        )

    def vector_provider(self, sims):
        """Vectors arranged so cosine(variant_i, original) == sims[i]."""
        vectors = {"original": [1.0, 0.0]}
        for i, s in enumerate(sims):
            vectors[f"v{i}"] = [s, math.sqrt(max(0.0, 1 - s * s))]
        return VectorProvider(vectors)

    def test_threshold_rule(self):
        provider = self.vector_provider([0.8, 0.5])
        out = validate_paraphrases(self.make_set(["v0", "v1"]), "original", provider, threshold=0.6)
        assert [v.valid for v in out.variants] == [True, False]
        assert out.confidence_score == pytest.approx(0.8)

    def test_all_below_threshold(self):
        provider = self.vector_provider([0.1, 0.2])
        out = validate_paraphrases(self.make_set(["v0", "v1"]), "original", provider, threshold=0.6)
        assert not any(v.valid for v in out.variants)
        assert out.confidence_score == 0.0

    def test_mean_confidence(self):
        provider = self.vector_provider([0.7, 0.9])
        out = validate_paraphrases(self.make_set(["v0", "v1"]), "original", provider, threshold=0.6)
        assert out.confidence_score == pytest.approx(0.8)

    def test_invalid_variants_retained(self):
        provider = self.vector_provider([0.9, 0.1])
        out = validate_paraphrases(self.make_set(["v0", "v1"]), "original", provider, threshold=0.6)
        assert len(out.variants) == 2
        assert out.variants[1].valid is False

    def test_threshold_monotonicity(self):
        sims = [0.1, 0.3, 0.45, 0.6, 0.62, 0.8, 0.95]
        provider = self.vector_provider(sims)
        pset = self.make_set([f"v{i}" for i in range(len(sims))])
        previous = len(sims) + 1
        for threshold in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            out = validate_paraphrases(pset, "original", provider, threshold=threshold)
            n_valid = sum(v.valid for v in out.variants)
            assert n_valid <= previous
            previous = n_valid

    def test_valid_iff_similarity_clears_threshold(self):
        provider = MockProvider()
        pset = self.make_set(["some variant", "another one", "third"])
        out = validate_paraphrases(pset, "the original", provider, threshold=0.1)
        for v in out.variants:
            assert v.valid == (v.semantic_similarity >= 0.1)


class TestSerialization:
    def test_byte_identical_across_runs(self, example, music_schema):
        def run():
            provider = MockProvider()
            prompt = render_paraphrase_prompt(music_schema, example.gold_sql, 4)
            provider.script_response(prompt, numbered([f"Variant {i}?" for i in range(4)]))
            pset = generate_paraphrases(example, music_schema, 4, provider)
            return validate_paraphrases(pset, example.question, provider, threshold=0.6).to_json()

        assert run() == run()

    def test_roundtrip(self):
        pset = ParaphraseSet(
            example_id="spider-0",
            variants=(ParaphraseVariant("a", 0.5, False), ParaphraseVariant("b", 0.9, True)),
            confidence_score=0.9,
        )
        again = ParaphraseSet.from_json(pset.to_json())
        assert again.example_id == pset.example_id
        assert again.variants == pset.variants
        assert again.confidence_score == pset.confidence_score
