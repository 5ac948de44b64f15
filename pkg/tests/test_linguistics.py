import json

import numpy as np
import pytest

from sqlprobe.linguistics import (
    AnnotatedQuery,
    AnnotatedToken,
    AnnotationError,
    annotate,
    features,
    grammar_similarity,
    heuristic_annotate,
    kde_curve,
    load_annotations,
    subtree_count,
    summarize_distribution,
    text_digest,
    tokenize,
)


def make_query(heads, pos=None, texts=None):
    n = len(heads)
    pos = pos or ["NOUN"] * n
    texts = texts or [f"w{i}" for i in range(n)]
    return AnnotatedQuery(
        tokens=tuple(AnnotatedToken(text=t, pos=p, head=h) for t, p, h in zip(texts, pos, heads))
    )


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("How many singers?") == ["how", "many", "singers", "?"]

    def test_simple(self):
        assert tokenize("a b") == ["a", "b"]

    def test_empty_rejected(self):
        with pytest.raises(AnnotationError):
            tokenize("")
        with pytest.raises(AnnotationError):
            tokenize("   ")

    def test_apostrophe_and_comma(self):
        assert tokenize("singer's age, name") == ["singer", "'", "s", "age", ",", "name"]


class TestAnnotatedQueryInvariants:
    def test_exactly_one_root_enforced(self):
        with pytest.raises(AnnotationError):
            make_query([0, 1])  # two roots
        with pytest.raises(AnnotationError):
            make_query([1, 0])  # no root... cycle as well

    def test_head_out_of_range(self):
        with pytest.raises(AnnotationError):
            make_query([5])

    def test_cycle_detected(self):
        with pytest.raises(AnnotationError):
            make_query([0, 2, 1])


class TestHeuristicAnnotate:
    def test_single_root_invariant(self):
        for text in ("list all singers", "how many singers are there ?", "name", "a b c d e"):
            annotated = heuristic_annotate(text)
            roots = [i for i, tok in enumerate(annotated.tokens) if tok.head == i]
            assert len(roots) == 1

    def test_deterministic(self):
        a = heuristic_annotate("show the names of all stadiums")
        b = heuristic_annotate("show the names of all stadiums")
        assert a == b

    def test_list_all_singers_trace(self):
        annotated = heuristic_annotate("list all singers")
        assert annotated.tokens[0].pos == "VERB"
        assert annotated.heads == [0, 0, 0]

    def test_tokens_attach_to_nearest_preceding_verb(self):
        annotated = heuristic_annotate("the teacher listed and sorted names")
        # "listed" (index 2) is the first verb -> root; "sorted" (4) attaches
        # back to it; "names" attaches to "sorted".
        assert annotated.heads[2] == 2
        assert annotated.heads[4] == 2
        assert annotated.heads[5] == 4


class TestSubtreeCount:
    def test_single_token(self):
        assert subtree_count(make_query([0])) == 0

    def test_flat_tree(self):
        assert subtree_count(make_query([0, 0, 0])) == 1

    def test_chain(self):
        assert subtree_count(make_query([0, 0, 1, 2])) == 3

    def test_all_tokens_mode(self):
        q = make_query([0, 0, 1, 2])
        assert subtree_count(q, mode="all-tokens") == 4

    def test_removing_only_dependent_decrements(self):
        chain = make_query([0, 0, 1, 2])
        assert subtree_count(chain) == 3
        shorter = make_query([0, 0, 1])  # drop token 3, sole dependent of token 2
        assert subtree_count(shorter) == 2


class TestGrammarSimilarity:
    def test_identity(self):
        q = heuristic_annotate("list all singers in the database")
        sim = grammar_similarity(q, q)
        assert (sim.s_tree, sim.s_pos, sim.s_grammar) == (1.0, 1.0, 1.0)

    def test_hand_case(self):
        # T1=2, T2=4; P1={NOUN,VERB,DET}, P2={NOUN,VERB,DET,ADJ}
        q1 = make_query([1, 1, 1, 0], pos=["DET", "VERB", "NOUN", "NOUN"])
        assert subtree_count(q1) == 2
        q2 = make_query([1, 1, 1, 2, 3, 0], pos=["DET", "VERB", "ADJ", "NOUN", "NOUN", "NOUN"])
        assert subtree_count(q2) == 4
        sim = grammar_similarity(q1, q2)
        assert sim.s_tree == pytest.approx(0.5, abs=1e-12)
        assert sim.s_pos == pytest.approx(0.75, abs=1e-12)
        assert sim.s_grammar == pytest.approx(0.625, abs=1e-12)

    def test_disjoint_pos_sets(self):
        q1 = make_query([0, 0], pos=["NOUN", "NOUN"])
        q2 = make_query([0, 0], pos=["VERB", "ADV"])
        assert grammar_similarity(q1, q2).s_pos == 0.0

    def test_symmetry_and_bounds(self):
        queries = [
            heuristic_annotate(t)
            for t in (
                "list all singers",
                "how many concerts were there in 2020 ?",
                "show the names and locations of stadiums",
                "what is the average age ?",
            )
        ]
        for q1 in queries:
            for q2 in queries:
                a = grammar_similarity(q1, q2)
                b = grammar_similarity(q2, q1)
                assert a == b
                for value in (a.s_tree, a.s_pos, a.s_grammar):
                    assert 0.0 <= value <= 1.0
                assert a.s_grammar == pytest.approx((a.s_tree + a.s_pos) / 2, abs=1e-15)

    def test_both_empty_trees(self):
        q1, q2 = make_query([0]), make_query([0])
        assert grammar_similarity(q1, q2).s_tree == 1.0


class TestFeatures:
    def test_depth_three_tokens(self):
        assert features(make_query([1, 1, 1])).syntactic_depth == 1

    def test_depth_hand_max(self):
        assert features(make_query([2, 2, 2, 2, 0])).syntactic_depth == 4

    def test_lexical_diversity(self):
        q = make_query([0, 0, 0, 0, 0], texts=["the", "name", "of", "the", "maker"])
        assert features(q).lexical_diversity == pytest.approx(0.8)

    def test_length(self):
        assert features(make_query([0, 0, 0])).length == 3

    def test_pos_invariance(self):
        heads = [1, 1, 1, 0]
        texts = ["a", "b", "c", "d"]
        f1 = features(make_query(heads, pos=["NOUN"] * 4, texts=texts))
        f2 = features(make_query(heads, pos=["VERB", "DET", "ADJ", "X"], texts=texts))
        assert f1 == f2


class TestDistributions:
    def test_constant_values(self):
        summary = summarize_distribution([1.0, 1.0, 1.0, 1.0])
        assert summary.mean == 1.0
        assert summary.median == 1.0
        assert summary.q75 - summary.q25 == 0.0
        assert summary.ci95_lo == summary.ci95_hi == 1.0

    def test_two_values(self):
        summary = summarize_distribution([0.0, 1.0])
        assert summary.mean == 0.5
        assert summary.median == 0.5

    def test_requires_two_values(self):
        with pytest.raises(ValueError):
            summarize_distribution([1.0])

    @pytest.mark.parametrize(
        "values",
        [
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0],
            [0.2, 0.4, 0.4, 0.9, 1.3],
            list(np.random.default_rng(3).normal(5, 2, 200)),
            [10.0, 10.0, 10.0, 42.0],
        ],
    )
    def test_kde_integrates_to_one(self, values):
        curve = kde_curve(values)
        xs = np.array([x for x, _ in curve])
        ds = np.array([d for _, d in curve])
        integral = np.trapezoid(ds, xs)
        assert abs(integral - 1.0) <= 0.02
        assert len(curve) == 200

    def test_kde_grid_spans_band(self):
        curve = kde_curve([0.0, 1.0])
        xs = [x for x, _ in curve]
        assert xs[0] < 0.0 < 1.0 < xs[-1]


class TestAnnotationsFile:
    def test_load_and_precedence(self, tmp_path):
        text = "list all singers"
        record = {
            "text_digest": text_digest(text),
            "text": text,
            "tokens": [
                {"text": "list", "pos": "VERB", "head": 0},
                {"text": "all", "pos": "DET", "head": 2},
                {"text": "singers", "pos": "NOUN", "head": 0},
            ],
        }
        path = tmp_path / "annotations.jsonl"
        path.write_text(
            json.dumps({"model": "external-parser", "version": "1.0"}) + "\n"
            + json.dumps(record) + "\n",
            encoding="utf-8",
        )
        annotations = load_annotations(path)
        annotated, external = annotate(text, annotations)
        assert external is True
        assert annotated.heads == [0, 2, 0]
        annotated2, external2 = annotate("unknown text", annotations)
        assert external2 is False

    def test_digest_mismatch_rejected(self, tmp_path):
        path = tmp_path / "annotations.jsonl"
        path.write_text(
            json.dumps(
                {
                    "text_digest": "0" * 64,
                    "text": "list all singers",
                    "tokens": [{"text": "x", "pos": "NOUN", "head": 0}],
                }
            )
            + "\n",
            encoding="utf-8",
        )
        with pytest.raises(AnnotationError, match="digest"):
            load_annotations(path)
