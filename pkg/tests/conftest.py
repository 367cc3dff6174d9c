"""Shared helpers for the test suite."""

import numpy as np
from scipy.stats import chi2

from volsample import ProblemMatrix


def random_full_rank(rng, d, n, max_cond=1e6):
    """A random Gaussian design matrix, resampled while badly conditioned.

    Keeps the exact-equality tolerances in the suite meaningful; rejection
    almost never triggers for Gaussian entries.
    """
    while True:
        entries = rng.standard_normal((d, n))
        if np.linalg.cond(entries @ entries.T) <= max_cond:
            return ProblemMatrix(entries)


def encode_subsets(rows, n):
    """Injective integer keys for sorted index rows (vectorized)."""
    rows = np.asarray(rows, dtype=np.int64)
    base = np.int64(n + 1) ** np.arange(rows.shape[-1], dtype=np.int64)
    return rows @ base


def chisquare_pvalue(counts, probs):
    """Goodness-of-fit p-value of observed counts against probabilities."""
    obs = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    expected = probs * obs.sum()
    mask = expected > 0
    assert np.all(obs[~mask] == 0), "draws landed on zero-probability subsets"
    stat = float(((obs[mask] - expected[mask]) ** 2 / expected[mask]).sum())
    df = int(mask.sum()) - 1
    if df <= 0:
        return 1.0
    return float(chi2.sf(stat, df))


def empirical_subset_counts(samples, table):
    """Counts of each enumerated subset among sampled index rows."""
    n = table[0][0].n
    keys = encode_subsets(samples, n)
    table_keys = encode_subsets([sub.indices for sub, _ in table], n)
    lookup = {int(k): i for i, k in enumerate(table_keys)}
    counts = np.zeros(len(table), dtype=np.int64)
    unique, freq = np.unique(keys, return_counts=True)
    for key, count in zip(unique, freq):
        counts[lookup[int(key)]] = count
    return counts
