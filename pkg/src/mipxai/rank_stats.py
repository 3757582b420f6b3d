"""Kendall's tau-b and Pearson's r between two orderings, with p-values."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import stdtr

from .core import Ranking
from .exceptions import InputError, StructuralError, UndefinedStatisticError

ALTERNATIVES = ("two-sided", "greater", "less")
EXACT_MAX_N = 10


class TauResult(NamedTuple):
    statistic: float
    pvalue: float  # normal approximation with tie-adjusted variance
    exact_pvalue: float | None  # permutation distribution; n <= 10 without ties


class PearsonResult(NamedTuple):
    statistic: float
    pvalue: float


def _pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError(f"inputs must be 1-d and of equal length, got {x.shape} and {y.shape}")
    if x.size < 3:
        raise InputError(f"need at least 3 paired values, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InputError("inputs must be finite")
    return x, y


def _normal_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _tail(sf_upper, sf_lower, alternative):
    """Combine upper/lower tail probabilities into a p-value."""
    if alternative == "greater":
        return sf_upper
    if alternative == "less":
        return sf_lower
    return min(1.0, 2.0 * min(sf_upper, sf_lower))


def _tie_sums(v):
    _, counts = np.unique(v, return_counts=True)
    t = counts[counts > 1].astype(float)
    return (t * (t - 1)).sum(), (t * (t - 1) * (t - 2)).sum(), (t * (t - 1) * (2 * t + 5)).sum()


@lru_cache(maxsize=None)
def _inversion_counts(n: int) -> tuple[int, ...]:
    """Number of permutations of n items with k inversions, k = 0..n(n-1)/2."""
    counts = [1]
    for m in range(2, n + 1):
        new = [0] * (len(counts) + m - 1)
        for k, c in enumerate(counts):
            for j in range(m):
                new[k + j] += c
        counts = new
    return tuple(counts)


def _exact_tau_tails(n: int, discordant: int) -> tuple[float, float]:
    """P(D <= d) and P(D >= d) under a uniformly random permutation."""
    counts = _inversion_counts(n)
    total = math.factorial(n)
    upper_tau = sum(counts[: discordant + 1]) / total  # tau >= observed
    lower_tau = sum(counts[discordant:]) / total  # tau <= observed
    return upper_tau, lower_tau


def kendall_tau_b(x: Sequence[float], y: Sequence[float],
                  alternative: str = "two-sided",
                  continuity_correction: bool = True) -> TauResult:
    """Kendall's tau-b with tie correction.

    The p-value uses the normal approximation of the concordance score with
    the tie-adjusted variance; by default the score is shrunk by 1 toward
    zero (continuity correction), which keeps it close to the exact
    distribution for small n.  For n <= 10 without ties the exact
    permutation p-value is also returned.
    """
    if alternative not in ALTERNATIVES:
        raise InputError(f"alternative must be one of {ALTERNATIVES}")
    x, y = _pair(x, y)
    n = x.size
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(n, 1)
    prod = (dx * dy)[iu]
    concordant = int((prod > 0).sum())
    discordant = int((prod < 0).sum())
    s = concordant - discordant
    n0 = n * (n - 1) / 2
    t1, t2, t3 = _tie_sums(x)
    u1, u2, u3 = _tie_sums(y)
    n1, n2 = t1 / 2, u1 / 2
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0:
        raise UndefinedStatisticError("tau-b undefined: an input is constant")
    tau = s / denom

    var_s = ((n * (n - 1) * (2 * n + 5) - t3 - u3) / 18.0
             + t1 * u1 / (2.0 * n * (n - 1))
             + t2 * u2 / (9.0 * n * (n - 1) * (n - 2)))
    if var_s <= 0:
        p = 1.0
    else:
        sd = math.sqrt(var_s)
        if continuity_correction:
            upper, lower = _normal_sf((s - 1) / sd), _normal_sf((-s - 1) / sd)
        else:
            upper, lower = _normal_sf(s / sd), _normal_sf(-s / sd)
        p = _tail(upper, lower, alternative)

    exact = None
    if n <= EXACT_MAX_N and t1 == 0 and u1 == 0:
        upper, lower = _exact_tau_tails(n, discordant)
        exact = _tail(upper, lower, alternative)
    return TauResult(float(tau), float(p), exact)


def pearson_r(x: Sequence[float], y: Sequence[float],
              alternative: str = "two-sided") -> PearsonResult:
    """Sample correlation with a t-test on n - 2 degrees of freedom."""
    if alternative not in ALTERNATIVES:
        raise InputError(f"alternative must be one of {ALTERNATIVES}")
    x, y = _pair(x, y)
    n = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    sxx, syy = xc @ xc, yc @ yc
    if sxx == 0 or syy == 0:
        raise UndefinedStatisticError("Pearson r undefined: an input has zero variance")
    r = float(np.clip(xc @ yc / math.sqrt(sxx * syy), -1.0, 1.0))
    df = n - 2
    if abs(r) == 1.0:
        upper = 0.0 if r > 0 else 1.0
        lower = 1.0 - upper
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        upper = float(stdtr(df, -t))
        lower = float(stdtr(df, t))
    return PearsonResult(r, _tail(upper, lower, alternative))


def coded_orders(benchmark: Ranking | Sequence[str], other: Ranking | Sequence[str],
                 coding: dict[str, int] | None = None) -> tuple[list[int], list[int]]:
    """Code vectors of two orderings, read position by position.

    Each feature gets an integer code (by default its position in
    ``benchmark``); each ordering becomes the sequence of codes of the
    features it lists, most important first.
    """
    bench = list(benchmark.names if isinstance(benchmark, Ranking) else benchmark)
    oth = list(other.names if isinstance(other, Ranking) else other)
    if sorted(bench) != sorted(oth) or len(set(bench)) != len(bench):
        raise StructuralError("orderings must list the same features exactly once")
    if coding is None:
        coding = {name: i for i, name in enumerate(bench, start=1)}
    missing = [n for n in bench if n not in coding]
    if missing:
        raise StructuralError(f"no code for features {missing}")
    return [coding[n] for n in bench], [coding[n] for n in oth]
