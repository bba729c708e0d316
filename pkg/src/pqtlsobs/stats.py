"""Campaign statistics: proportion intervals, paired tests, uplift estimates.

Family buckets run around n=100 and discordant counts can be tiny, so
every procedure here is exact or closed-form rather than asymptotic:
Wilson score instead of the normal approximation, exact-binomial McNemar
instead of chi-square, percentile bootstrap for uplift.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

import numpy as np

from .errors import StatsError


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k successes in n trials.

    Never leaves [0, 1]; k = 0 pins the lower bound to exactly 0.0.
    """
    if n < 1:
        raise StatsError("wilson_interval requires at least one trial", k=k, n=n)
    if not 0 <= k <= n:
        raise StatsError("successes must lie in [0, trials]", k=k, n=n)
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2.0 * n)) / denom
    spread = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    return max(0.0, centre - spread), min(1.0, centre + spread)


def mcnemar_test(b: int, c: int) -> dict:
    """Exact-binomial McNemar test on the two discordant cell counts.

    Concordant pairs never enter the statistic. The two-sided p-value
    doubles the binomial tail of min(b, c) successes in b + c fair-coin
    trials, clamped to 1.0. The variant is recorded in the output so
    results from other McNemar forms are never silently compared.
    """
    if b < 0 or c < 0:
        raise StatsError("discordant counts must be non-negative", b=b, c=c)
    n = b + c
    statistic = min(b, c)
    if n == 0:
        return {"statistic": 0, "p_value": 1.0, "variant": "exact_binomial", "degenerate": True}
    tail = sum(math.comb(n, i) for i in range(statistic + 1)) / 2.0**n
    return {
        "statistic": statistic,
        "p_value": min(1.0, 2.0 * tail),
        "variant": "exact_binomial",
        "degenerate": False,
    }


def _pair_diffs(pairs: Sequence) -> np.ndarray:
    diffs = []
    for pair in pairs:
        if isinstance(pair, Mapping):
            a, b = pair["mode_a_hit"], pair["mode_b_hit"]
        else:
            a, b = pair
        diffs.append(float(b) - float(a))
    return np.asarray(diffs)


def bootstrap_uplift(pairs: Sequence, iterations: int = 10_000, seed: int = 0) -> dict:
    """Percentile-bootstrap uplift over paired per-target outcomes.

    Pairs are (mode_a_hit, mode_b_hit) two-sequences or mappings with
    those keys; the point estimate is mean(b) - mean(a). Resampling
    keeps pairs intact so within-target correlation survives.
    """
    if not pairs:
        raise StatsError("bootstrap_uplift requires at least one pair")
    if iterations < 1000:
        raise StatsError("fewer than 1000 iterations gives unstable percentiles", iterations=iterations)
    diffs = _pair_diffs(pairs)
    point = float(diffs.mean())
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, len(diffs), size=(iterations, len(diffs)))
    means = diffs[indices].mean(axis=1)
    ci_low, ci_high = np.percentile(means, [2.5, 97.5])
    return {
        "point": point,
        "ci_low": float(ci_low),
        "ci_high": float(ci_high),
        "iterations": iterations,
        "seed": seed,
    }
