"""Monte Carlo cumulant estimation for pattern counts.

Sampling holds the tree fixed and draws independent uniform labellings.
Orders 1..4 use Fisher's k-statistics (exactly unbiased for cumulants);
orders 5 and 6 fall back to plug-in sample cumulants, which are biased at
O(1/n) -- acceptable for trend experiments, flagged in the estimator
field.  Standard errors come from a nonparametric bootstrap because the
count distribution is skewed and tree-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constants import d_constant, moments_to_cumulants
from .errors import Infeasible, InvalidInput
from .patterns import Pattern, count_occurrences_batch, exact_distribution

MAX_ESTIMATE_R = 6
DEFAULT_BOOTSTRAP = 200


@dataclass(frozen=True)
class CumulantEstimate:
    order: int
    estimate: float
    standard_error: float
    sample_count: int
    estimator: str  # "k-statistic" or "sample-cumulant"


def k_statistics(sample: Sequence, max_r: int = 4) -> list:
    """Unbiased cumulant estimators k_1..k_max_r (max_r <= 4).

    Works over exact Fractions as well as floats; numpy arrays go through
    the float path.
    """
    if max_r > 4:
        raise InvalidInput("closed-form k-statistics implemented through order 4")
    xs = list(sample)
    n = len(xs)
    if n < 2 and max_r >= 2:
        raise InvalidInput("need at least 2 samples beyond the mean")
    exact = any(isinstance(x, Fraction) for x in xs)
    if exact:
        mean = sum(xs, Fraction(0)) / n
        m = {p: sum(((x - mean) ** p for x in xs), Fraction(0)) / n for p in (2, 3, 4)}
    else:
        arr = np.asarray(xs, dtype=np.float64)
        mean = float(arr.mean())
        diff = arr - mean
        m = {p: float(np.mean(diff**p)) for p in (2, 3, 4)}
    out = [mean]
    if max_r >= 2:
        out.append(m[2] * n / (n - 1))
    if max_r >= 3:
        if n < 3:
            raise InvalidInput("k3 needs at least 3 samples")
        out.append(m[3] * n * n / ((n - 1) * (n - 2)))
    if max_r >= 4:
        if n < 4:
            raise InvalidInput("k4 needs at least 4 samples")
        num = (n + 1) * m[4] - 3 * (n - 1) * m[2] * m[2]
        out.append(num * n * n / ((n - 1) * (n - 2) * (n - 3)))
    return out


def sample_cumulants(sample: np.ndarray, max_r: int) -> list[float]:
    """Plug-in cumulants from raw sample moments (biased)."""
    arr = np.asarray(sample, dtype=np.float64)
    moments = [float(np.mean(arr**p)) for p in range(1, max_r + 1)]
    ks: list[float] = []
    for r in range(1, max_r + 1):
        k = moments[r - 1]
        for j in range(1, r):
            k -= math.comb(r - 1, j - 1) * ks[j - 1] * moments[r - j - 1]
        ks.append(k)
    return ks


def _estimates_from_counts(counts: np.ndarray, max_r: int) -> list[float]:
    vals = k_statistics(counts, min(max_r, 4))
    if max_r > 4:
        vals += sample_cumulants(counts, max_r)[4:max_r]
    return [float(v) for v in vals]


def sample_occurrence_counts(t, alpha: Pattern, samples: int, seed,
                             batch: int = 4096) -> np.ndarray:
    """Occurrence counts of alpha under `samples` uniform labellings."""
    from . import splitgen

    n = t.n_balls if isinstance(t, splitgen.SplitTree) else t.n
    rng = np.random.default_rng(seed)
    out = np.empty(samples, dtype=np.int64)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        labels = np.argsort(rng.random((m, n)), axis=1).astype(np.int64) + 1
        out[done : done + m] = count_occurrences_batch(t, alpha, labels)
        done += m
    return out


def estimate_cumulants(t, alpha: Pattern, max_r: int, samples: int, seed,
                       bootstrap_resamples: int = DEFAULT_BOOTSTRAP) -> list[CumulantEstimate]:
    """k-statistics (orders <= 4) and plug-in cumulants (5, 6) with
    bootstrap standard errors, from fresh uniform labellings of t."""
    if samples < 30:
        raise InvalidInput("need at least 30 labelling samples")
    if not (1 <= max_r <= MAX_ESTIMATE_R):
        raise InvalidInput(f"max_r must be in 1..{MAX_ESTIMATE_R}")
    counts = sample_occurrence_counts(t, alpha, samples, seed)
    point = _estimates_from_counts(counts, max_r)

    rng = np.random.default_rng(np.random.SeedSequence([_seed_int(seed), 0xB0075]))
    boots = np.empty((bootstrap_resamples, max_r))
    for i in range(bootstrap_resamples):
        resample = counts[rng.integers(0, samples, samples)]
        boots[i] = _estimates_from_counts(resample, max_r)
    ses = boots.std(axis=0, ddof=1)

    out = []
    for r in range(1, max_r + 1):
        out.append(
            CumulantEstimate(
                order=r,
                estimate=point[r - 1],
                standard_error=float(ses[r - 1]),
                sample_count=samples,
                estimator="k-statistic" if r <= 4 else "sample-cumulant",
            )
        )
    return out


def _seed_int(seed) -> int:
    if seed is None:
        return 0
    return int(seed) & ((1 << 63) - 1)


def exact_cumulants(t, alpha: Pattern, max_r: int) -> list[Fraction]:
    """Exact cumulants of the occurrence count, via the full labelling pmf."""
    pmf = exact_distribution(t, alpha)
    moments = []
    for r in range(1, max_r + 1):
        moments.append(sum((p * x**r for x, p in pmf.items()), Fraction(0)))
    return moments_to_cumulants(moments)


@dataclass(frozen=True)
class TheoremRatio:
    """kappa_hat_r / (D * upsilon); ``d_zero`` signals an undefined ratio.

    When the cumulant coefficient vanishes the limit statement only says
    the cumulant is of smaller order than upsilon, so the ratio field is
    None and ``kappa_over_upsilon`` carries the raw decay quantity.
    """

    order: int
    ratio: float | None
    d_zero: bool
    kappa_over_upsilon: float
    upsilon: int
    d_value: Fraction


def theorem_ratio(t, alpha: Pattern, r: int, estimate: CumulantEstimate) -> TheoremRatio:
    from . import splitgen
    from .treeparams import upsilon as upsilon_fn

    if estimate.order != r:
        raise InvalidInput("estimate order does not match r")
    tree = t.tree if isinstance(t, splitgen.SplitTree) else t
    ups = upsilon_fn(tree, r, alpha.k, mode="with_repetition")
    if ups == 0:
        raise Infeasible("upsilon vanishes; the ratio is not defined on this tree")
    d = d_constant(alpha, r)
    kou = estimate.estimate / float(ups)
    if d == 0:
        return TheoremRatio(r, None, True, kou, ups, d)
    return TheoremRatio(r, estimate.estimate / (float(d) * float(ups)), False, kou, ups, d)
