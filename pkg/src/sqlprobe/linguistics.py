"""Grammatical similarity, syntactic/lexical features, and distributions.

Questions are compared via dependency-tree size and POS-tag-set overlap; per
question we also report token length, maximum head distance, and lexical
diversity.  Externally produced annotations (the annotation JSONL contract)
take precedence; a deterministic lexicon+suffix tagger with rule-based head
assignment covers everything else.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .metrics import bootstrap_ci

UNIVERSAL_POS_TAGS = frozenset(
    "ADJ ADP ADV AUX CCONJ DET INTJ NOUN NUM PART PRON PROPN PUNCT SCONJ SYM VERB X".split()
)

SUBTREE_MODES = ("internal", "all-tokens")


class AnnotationError(Exception):
    pass


@dataclass(frozen=True)
class AnnotatedToken:
    text: str
    pos: str
    head: int  # 0-based index of the syntactic head; root points to itself


@dataclass(frozen=True)
class AnnotatedQuery:
    tokens: tuple[AnnotatedToken, ...]

    def __post_init__(self):
        n = len(self.tokens)
        if n == 0:
            raise AnnotationError("annotated query must have at least one token")
        roots = []
        for i, tok in enumerate(self.tokens):
            if not 0 <= tok.head < n:
                raise AnnotationError(f"token {i}: head index {tok.head} out of range")
            if tok.head == i:
                roots.append(i)
        if len(roots) != 1:
            raise AnnotationError(f"expected exactly one root, found {len(roots)}")
        root = roots[0]
        for i in range(n):
            # Follow head links; anything not reaching the root is a cycle.
            seen = set()
            j = i
            while j != root:
                if j in seen:
                    raise AnnotationError(f"head links contain a cycle through token {i}")
                seen.add(j)
                j = self.tokens[j].head

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def heads(self) -> list[int]:
        return [t.head for t in self.tokens]

    @property
    def pos_tags(self) -> list[str]:
        return [t.pos for t in self.tokens]


@dataclass(frozen=True)
class GrammarSimilarity:
    s_tree: float
    s_pos: float
    s_grammar: float


@dataclass(frozen=True)
class LinguisticFeatures:
    length: int
    syntactic_depth: int
    lexical_diversity: float


@dataclass(frozen=True)
class DistributionSummary:
    mean: float
    median: float
    q25: float
    q75: float
    min: float
    max: float
    ci95_lo: float
    ci95_hi: float
    kde_curve: tuple[tuple[float, float], ...]

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "median": self.median,
            "q25": self.q25,
            "q75": self.q75,
            "min": self.min,
            "max": self.max,
            "ci95_lo": self.ci95_lo,
            "ci95_hi": self.ci95_hi,
        }


# ---------------------------------------------------------------------------
# Tokenization and heuristic annotation
# ---------------------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, and split punctuation into own tokens."""
    if not text or not text.strip():
        raise AnnotationError("cannot tokenize empty text")
    tokens: list[str] = []
    word: list[str] = []
    for ch in text.lower():
        if ch.isalnum() or ch == "_":
            word.append(ch)
            continue
        if word:
            tokens.append("".join(word))
            word = []
        if not ch.isspace():
            tokens.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens


_LEXICON = {
    "DET": {
        "the", "a", "an", "this", "that", "these", "those", "all", "every",
        "each", "any", "some", "no", "both", "either",
    },
    "PRON": {
        "i", "you", "he", "she", "it", "we", "they", "who", "whom", "whose",
        "what", "which", "me", "him", "her", "us", "them", "there",
        "his", "its", "our", "your", "my", "their",
    },
    "ADP": {
        "of", "in", "on", "at", "by", "for", "with", "from", "to", "into",
        "over", "under", "between", "among", "per", "across", "within",
        "without", "about", "against", "during", "through", "above", "below",
        "than", "as",
    },
    "AUX": {
        "is", "are", "was", "were", "be", "been", "being", "am", "do", "does",
        "did", "have", "has", "had", "can", "could", "will", "would", "shall",
        "should", "may", "might", "must",
    },
    "CCONJ": {"and", "or", "but", "nor"},
    "SCONJ": {"if", "because", "while", "whether", "since", "although", "that", "when", "where"},
    "ADV": {
        "how", "why", "not", "also", "only", "very", "more", "most", "least",
        "too", "then", "currently", "respectively",
    },
    "ADJ": {
        "many", "much", "average", "maximum", "minimum", "total", "distinct",
        "different", "unique", "highest", "lowest", "oldest", "youngest",
        "largest", "smallest", "common", "first", "last",
    },
    "VERB": {
        "list", "show", "find", "give", "tell", "display", "return", "count",
        "get", "identify", "provide", "retrieve", "order", "sort", "group",
        "select", "compute", "calculate", "determine", "include", "exclude",
        "share", "belong", "live", "work", "have", "contain", "make", "produce",
    },
}
# Precedence when a word sits in several lists (e.g. "have"): function-word
# classes win over VERB so auxiliaries keep their tag.
_LEXICON_ORDER = ("DET", "PRON", "ADP", "AUX", "CCONJ", "SCONJ", "ADV", "ADJ", "VERB")

_SUFFIX_RULES = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("est", "ADJ"),
    ("ic", "ADJ"),
    ("al", "ADJ"),
    ("tion", "NOUN"),
    ("ment", "NOUN"),
    ("ness", "NOUN"),
    ("ity", "NOUN"),
)


def _tag_token(token: str) -> str:
    if not any(ch.isalnum() for ch in token):
        return "PUNCT" if token not in "$%+=<>^|~#" else "SYM"
    if token[0].isdigit():
        return "NUM"
    for tag in _LEXICON_ORDER:
        if token in _LEXICON[tag]:
            return tag
    for suffix, tag in _SUFFIX_RULES:
        if len(token) > len(suffix) + 1 and token.endswith(suffix):
            return tag
    return "NOUN"


def heuristic_annotate(text: str) -> AnnotatedQuery:
    """Deterministic fallback annotation.

    POS tags come from a lexicon plus suffix rules over the universal tag
    set.  The first VERB (else the first token) is the root; every other
    token attaches to the nearest preceding VERB, or to the root when no verb
    precedes it.
    """
    tokens = tokenize(text)
    tags = [_tag_token(t) for t in tokens]
    verb_indices = [i for i, tag in enumerate(tags) if tag == "VERB"]
    root = verb_indices[0] if verb_indices else 0
    heads = []
    for i in range(len(tokens)):
        if i == root:
            heads.append(i)
            continue
        preceding = [v for v in verb_indices if v < i]
        heads.append(preceding[-1] if preceding else root)
    return AnnotatedQuery(
        tokens=tuple(
            AnnotatedToken(text=t, pos=tag, head=h) for t, tag, h in zip(tokens, tags, heads)
        )
    )


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_annotations(path: Union[str, Path]) -> dict[str, AnnotatedQuery]:
    """Load annotation JSONL keyed by text digest.

    A leading header object (model/version metadata, no "tokens" field) is
    tolerated and skipped.  Malformed lines raise, mismatched digests raise.
    """
    annotations: dict[str, AnnotatedQuery] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "tokens" not in record:
                if lineno == 1 and "model" in record:
                    continue
                raise AnnotationError(f"{path}:{lineno}: record has no tokens")
            digest = record.get("text_digest") or text_digest(record["text"])
            if "text" in record and record.get("text_digest"):
                if text_digest(record["text"]) != record["text_digest"]:
                    raise AnnotationError(f"{path}:{lineno}: digest does not match text")
            query = AnnotatedQuery(
                tokens=tuple(
                    AnnotatedToken(text=t["text"], pos=t["pos"], head=t["head"])
                    for t in record["tokens"]
                )
            )
            annotations[digest] = query
    return annotations


def annotate(text: str, annotations: Optional[dict[str, AnnotatedQuery]] = None) -> tuple[AnnotatedQuery, bool]:
    """Return (annotation, used_external) preferring supplied annotations."""
    if annotations:
        found = annotations.get(text_digest(text))
        if found is not None:
            return found, True
    return heuristic_annotate(text), False


# ---------------------------------------------------------------------------
# Similarity and features
# ---------------------------------------------------------------------------

def subtree_count(query: AnnotatedQuery, mode: str = "internal") -> int:
    """Number of dependency subtrees.

    mode="internal" counts tokens that head at least one dependent, making
    the measure structural rather than a proxy for length; mode="all-tokens"
    counts every token as a subtree.
    """
    if mode not in SUBTREE_MODES:
        raise ValueError(f"unknown subtree mode: {mode!r}")
    if mode == "all-tokens":
        return len(query.tokens)
    has_dependent = set()
    for i, tok in enumerate(query.tokens):
        if tok.head != i:
            has_dependent.add(tok.head)
    return len(has_dependent)


def grammar_similarity(
    q1: AnnotatedQuery, q2: AnnotatedQuery, subtree_mode: str = "internal"
) -> GrammarSimilarity:
    """Tree-size similarity and POS-set overlap, averaged.

    s_tree = 1 - |T1 - T2| / max(T1, T2)   (1 when both are 0)
    s_pos  = |P1 & P2| / max(|P1|, |P2|)   over POS tag sets
    s_grammar = (s_tree + s_pos) / 2
    """
    t1 = subtree_count(q1, subtree_mode)
    t2 = subtree_count(q2, subtree_mode)
    s_tree = 1.0 if max(t1, t2) == 0 else 1.0 - abs(t1 - t2) / max(t1, t2)
    p1, p2 = set(q1.pos_tags), set(q2.pos_tags)
    s_pos = len(p1 & p2) / max(len(p1), len(p2))
    return GrammarSimilarity(s_tree=s_tree, s_pos=s_pos, s_grammar=(s_tree + s_pos) / 2.0)


def features(query: AnnotatedQuery) -> LinguisticFeatures:
    """Token length, maximum head distance, and unique/total token ratio."""
    depth = max(abs(tok.head - i) for i, tok in enumerate(query.tokens))
    texts = query.texts
    return LinguisticFeatures(
        length=len(texts),
        syntactic_depth=depth,
        lexical_diversity=len(set(texts)) / len(texts),
    )


# ---------------------------------------------------------------------------
# Distribution summaries
# ---------------------------------------------------------------------------

def _silverman_bandwidth(values: np.ndarray) -> float:
    sd = float(np.std(values))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    candidates = [c for c in (sd, iqr / 1.34) if c > 0]
    if not candidates:
        # Constant input; any positive width gives a usable bump.
        scale = abs(float(values[0]))
        return max(1e-3, 1e-3 * scale)
    return 0.9 * min(candidates) * len(values) ** (-0.2)


def kde_curve(values: Sequence[float], n_points: int = 200) -> list[tuple[float, float]]:
    """Gaussian KDE with Silverman bandwidth on [min - bw, max + bw].

    The curve is normalized so its trapezoid integral over the emitted grid
    is 1, making it directly comparable across samples.
    """
    arr = np.asarray(values, dtype=float)
    bw = _silverman_bandwidth(arr)
    grid = np.linspace(arr.min() - bw, arr.max() + bw, n_points)
    diffs = (grid[:, None] - arr[None, :]) / bw
    density = np.exp(-0.5 * diffs**2).sum(axis=1) / (len(arr) * bw * np.sqrt(2 * np.pi))
    integral = float(np.trapezoid(density, grid))
    if integral > 0:
        density = density / integral
    return [(float(x), float(d)) for x, d in zip(grid, density)]


def summarize_distribution(
    values: Sequence[float],
    n_resamples: int = 1000,
    seed: int = 0,
    kde_points: int = 200,
) -> DistributionSummary:
    """Summary statistics, bootstrap 95% CI of the mean, and a KDE curve."""
    if len(values) < 2:
        raise ValueError("need at least 2 values to summarize a distribution")
    arr = np.asarray(values, dtype=float)
    lo, hi = bootstrap_ci(list(map(float, arr)), n_resamples=n_resamples, seed=seed)
    return DistributionSummary(
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        q25=float(np.percentile(arr, 25)),
        q75=float(np.percentile(arr, 75)),
        min=float(arr.min()),
        max=float(arr.max()),
        ci95_lo=lo,
        ci95_hi=hi,
        kde_curve=tuple(kde_curve(arr, kde_points)),
    )
