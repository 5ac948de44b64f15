"""Pure evaluation statistics.

Accuracy with bootstrap confidence intervals, paraphrase degradation,
confidence-adjusted accuracy intervals, normalized schema error rates,
the unbiased Pass@K estimator, and structural bucketing.  Everything here is
deterministic given its explicit seed; nothing touches ambient randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_NER_EPSILON = 1e-6

BUCKET_KEYS = ("join_count", "has_group_by", "has_order_by", "has_having", "has_nested", "dataset")


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class AccuracyReport:
    n: int
    accuracy: float
    ci95: tuple[float, float]

    def as_dict(self) -> dict:
        return {"n": self.n, "accuracy": self.accuracy, "ci95": list(self.ci95)}


@dataclass(frozen=True)
class PassAtKInput:
    n: int
    c: int
    k: int

    def __post_init__(self):
        if not 0 <= self.c <= self.n:
            raise MetricsError(f"need 0 <= c <= n, got c={self.c}, n={self.n}")
        if not 1 <= self.k <= self.n:
            raise MetricsError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")


def bootstrap_ci(
    samples: Sequence[float],
    n_resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile-method bootstrap CI of the mean; deterministic per seed."""
    if len(samples) < 2:
        raise MetricsError("need at least 2 samples for a bootstrap CI")
    if not 0 < level < 1:
        raise MetricsError("level must be in (0, 1)")
    arr = np.asarray(samples, dtype=float)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, len(arr), size=(n_resamples, len(arr)))
    means = arr[indices].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [100 * alpha, 100 * (1 - alpha)])
    return float(lo), float(hi)


def accuracy(outcomes: Sequence, n_resamples: int = 1000, seed: int = 0) -> AccuracyReport:
    """Fraction matched over outcomes, excluding gold execution failures.

    Gold failures indicate dataset/database issues rather than model errors,
    so they do not enter the denominator.
    """
    retained = [o for o in outcomes if o.reason != "gold_error"]
    if not retained:
        raise MetricsError("no outcomes remain after excluding gold errors")
    indicators = [1.0 if o.match else 0.0 for o in retained]
    value = sum(indicators) / len(indicators)
    if len(indicators) >= 2:
        ci = bootstrap_ci(indicators, n_resamples=n_resamples, seed=seed)
    else:
        ci = (value, value)
    return AccuracyReport(n=len(indicators), accuracy=value, ci95=ci)


def degradation(a_orig: float, a_para: float) -> float:
    """Accuracy drop a_orig - a_para; both on the same scale."""
    if (a_orig > 1.0) != (a_para > 1.0):
        raise MetricsError(
            f"mixed scales: a_orig={a_orig}, a_para={a_para} (use [0,1] or [0,100] consistently)"
        )
    return a_orig - a_para


def adjusted_accuracy(a_para: float, cs: float) -> tuple[float, float]:
    """Confidence-adjusted accuracy interval [a*cs, a*(2-cs)].

    The +/- adjustment makes the true accuracy an interval, not a point; the
    upper bound is clamped to the scale maximum (1 or 100).
    """
    if not 0.0 <= cs <= 1.0:
        raise MetricsError(f"confidence score must be in [0,1], got {cs}")
    if a_para < 0.0:
        raise MetricsError(f"accuracy must be non-negative, got {a_para}")
    scale_max = 100.0 if a_para > 1.0 else 1.0
    lo = a_para * cs
    hi = min(scale_max, a_para * (2.0 - cs))
    return (lo, hi)


def normalized_error_rate(e_false: float, e_true: float, eps: float = DEFAULT_NER_EPSILON) -> float:
    """Error rate among failures scaled by the success baseline: e_f/(e_t+eps)."""
    if e_false < 0 or e_true < 0:
        raise MetricsError("error rates must be non-negative")
    if eps <= 0:
        raise MetricsError("eps must be positive")
    return e_false / (e_true + eps)


def pass_at_k(data: PassAtKInput) -> float:
    """Unbiased Pass@K: 1 - C(n-c, k)/C(n, k), as a running product.

    Computed in exact rational arithmetic (no explicit factorials), so
    pass_at_k(n, c, 1) equals c/n exactly in floating point.
    """
    n, c, k = data.n, data.c, data.k
    if n - c < k:
        return 1.0
    prod = Fraction(1)
    for j in range(k):
        prod *= Fraction(n - c - j, n - j)
    return float(1 - prod)


def mean_pass_at_k(counts: Sequence[tuple[int, int]], k: int) -> float:
    """Mean per-example pass@k over (n, c) replica counts."""
    if not counts:
        raise MetricsError("no per-example counts")
    return sum(pass_at_k(PassAtKInput(n=n, c=c, k=k)) for n, c in counts) / len(counts)


def bucket_by(
    records: Sequence,
    key: str,
    n_resamples: int = 1000,
    seed: int = 0,
) -> dict:
    """Group evaluation records and compute per-bucket accuracy.

    Structural keys read record.structure; "dataset" falls back to the
    example-id prefix (ids are synthesized as <format>-<index>).  Buckets
    whose records are all gold errors are omitted.
    """
    if key not in BUCKET_KEYS:
        raise MetricsError(f"unknown bucket key {key!r}; expected one of {BUCKET_KEYS}")
    groups: dict = {}
    for record in records:
        if key == "dataset":
            bucket = getattr(record, "dataset", None) or record.example_id.rsplit("-", 1)[0]
        else:
            bucket = getattr(record.structure, key)
        groups.setdefault(bucket, []).append(record.outcome)
    report = {}
    for bucket in sorted(groups, key=lambda b: (str(type(b)), b)):
        outcomes = groups[bucket]
        try:
            report[bucket] = accuracy(outcomes, n_resamples=n_resamples, seed=seed)
        except MetricsError:
            continue  # only gold errors in this bucket
    return report
