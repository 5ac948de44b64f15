"""Secondary-component contract: annotator exports load cleanly here.

tests/data/annotator_mini.jsonl is the committed output of
`annotator` run over the mini dataset questions plus one pinned sentence
(regenerate: cd annotator && npm run build && node dist/cli.js
 --in questions.jsonl --out annotations.jsonl).  The primary suite never
requires it: texts without external coverage fall back to the heuristic
annotator.
"""

import json
from pathlib import Path

import pytest

from sqlprobe.linguistics import annotate, features, load_annotations, text_digest

FIXTURE = Path(__file__).parent / "data" / "annotator_mini.jsonl"
PINNED = "What is the average age of singers from France?"


@pytest.fixture(scope="module")
def annotations():
    return load_annotations(FIXTURE)


def test_every_record_validates_against_contract(annotations):
    # load_annotations constructs AnnotatedQuery, which enforces the
    # invariants (single self-headed root, in-range heads, acyclic).
    assert len(annotations) == 21
    for digest, query in annotations.items():
        assert len(digest) == 64
        assert len(query.tokens) >= 1


def test_header_line_records_model_and_version():
    header = json.loads(FIXTURE.read_text(encoding="utf-8").splitlines()[0])
    assert "model" in header and "version" in header


def test_pinned_sentence_depth_matches_hand_derivation(annotations):
    query, external = annotate(PINNED, annotations)
    assert external is True
    # Hand-derived from the exported heads: the final token (index 9)
    # attaches to the root at index 1, giving max head distance 8.
    assert query.heads == [1, 1, 4, 4, 1, 6, 1, 8, 1, 1]
    assert features(query).syntactic_depth == 8


def test_external_annotations_take_precedence_over_heuristic(annotations):
    external_query, used_external = annotate(PINNED, annotations)
    heuristic_query, used_fallback = annotate(PINNED, None)
    assert used_external and not used_fallback
    # The two annotators tag differently; precedence is observable.
    assert external_query.tokens != heuristic_query.tokens


def test_digests_cover_mini_dataset_questions(annotations, mini_examples):
    for example in mini_examples:
        assert text_digest(example.question) in annotations


def test_harness_linguistics_consumes_annotations(tmp_path):
    """The annotations config key routes exports into the linguistics stage."""
    from pipeline_helpers import run_cli, write_pipeline_config
    from sqlprobe.linguistics import heuristic_annotate

    # Extend the committed export with one scripted variant text so exactly
    # one (original, variant) pair is fully externally covered.
    covered_variant = "How many singers do we have? (variant 1)"
    annotated = heuristic_annotate(covered_variant)
    extra = {
        "text_digest": text_digest(covered_variant),
        "text": covered_variant,
        "tokens": [{"text": t.text, "pos": t.pos, "head": t.head} for t in annotated.tokens],
    }
    merged = tmp_path / "annotations.jsonl"
    merged.write_text(
        FIXTURE.read_text(encoding="utf-8") + json.dumps(extra) + "\n", encoding="utf-8"
    )

    config_path = write_pipeline_config(tmp_path, "annotated", annotations=str(merged))
    assert run_cli("paraphrase", "--config", str(config_path)) == 0
    assert run_cli("linguistics", "--config", str(config_path)) == 0
    out = Path(json.loads(config_path.read_text())["output_dir"])
    report = json.loads((out / "linguistics.json").read_text())
    assert report["n_pairs"] == 200
    assert report["n_heuristic_annotated_pairs"] == 199  # the covered pair is unflagged

    pairs = (out / "linguistics_pairs.csv").read_text().splitlines()
    assert pairs[0].endswith("heuristic_annotation")
    assert len(pairs) == 201
    unflagged = [line for line in pairs[1:] if line.endswith(",False")]
    assert len(unflagged) == 1 and unflagged[0].startswith("spider-0,0,")
