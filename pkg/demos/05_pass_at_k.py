"""Pass@K estimation and bootstrap confidence intervals.

Compares the closed-form unbiased estimator against brute-force subset
enumeration, then shows the replica-count aggregation the harness uses.
"""

import itertools

import numpy as np

from sqlprobe.metrics import PassAtKInput, bootstrap_ci, mean_pass_at_k, pass_at_k


def enumerate_pass_at_k(n, c, k):
    replicas = [i < c for i in range(n)]
    subsets = list(itertools.combinations(range(n), k))
    return sum(1 for s in subsets if any(replicas[i] for i in s)) / len(subsets)


print("estimator vs. exhaustive enumeration:")
for n, c, k in [(5, 2, 2), (10, 3, 5), (10, 7, 2), (8, 1, 8)]:
    estimate = pass_at_k(PassAtKInput(n=n, c=c, k=k))
    oracle = enumerate_pass_at_k(n, c, k)
    print(f"  n={n:>2} c={c:>2} k={k:>2}: estimator={estimate:.6f} enumeration={oracle:.6f}")

print("\nper-example aggregation (two examples with 7/10 and 3/10 successes):")
counts = [(10, 7), (10, 3)]
for k in (1, 2, 5, 10):
    print(f"  pass@{k:<2} = {mean_pass_at_k(counts, k):.4f}")

print("\nbootstrap CI of a Bernoulli(0.7) accuracy sample:")
rng = np.random.default_rng(0)
outcomes = list(rng.binomial(1, 0.7, size=500).astype(float))
lo, hi = bootstrap_ci(outcomes, n_resamples=1000, seed=0)
print(f"  sample mean {np.mean(outcomes):.3f}, 95% CI [{lo:.3f}, {hi:.3f}]")
