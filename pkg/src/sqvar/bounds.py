"""Concentration bounds and their Monte Carlo verification.

Covered: the maximal Bernstein/Hoeffding tail bound for bounded summands
(with explicit constant 2 from the one-sided exponential-martingale argument
applied to both signs), Etemadi's maximal inequality, the Kolmogorov
distance to the normal limit, and the Rosenthal moment ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .seqcore import DistributionSpec, mix_seed, sample_sequence

_CHUNK = 1 << 22  # elements per Monte Carlo block


@dataclass(frozen=True)
class BoundQuery:
    """Inputs to the maximal tail bound: threshold t, total variance of the
    partial sum, a.s. bound M on each summand, and the number of summands."""

    t: float
    sum_var: float
    m_bound: float
    length: int

    def __post_init__(self):
        if self.t <= 0 or self.sum_var <= 0 or self.m_bound <= 0 or self.length < 1:
            raise ValueError("need t > 0, sum_var > 0, M > 0, L >= 1")


@dataclass(frozen=True)
class EmpiricalTail:
    threshold: float
    frequency: float
    trials: int

    @property
    def std_err(self) -> float:
        return math.sqrt(self.frequency * (1.0 - self.frequency) / self.trials)


def exp_remainder_ratio(y: float) -> float:
    """2(e^y - 1 - y)/y^2, continuously extended to 1 at y = 0."""
    if abs(y) < 1e-8:
        return 1.0 + y / 3.0
    return 2.0 * (math.exp(y) - 1.0 - y) / (y * y)


def bernstein_maximal_bound(q: BoundQuery) -> float:
    """P[max_l |S_l| > t] <= 2 exp(-(t^2/2) / (sum_var + M t / 3)), capped at 1."""
    expo = -(q.t * q.t / 2.0) / (q.sum_var + q.m_bound * q.t / 3.0)
    return min(1.0, 2.0 * math.exp(expo))


def _iter_chunks(spec: DistributionSpec, length: int, trials: int, seed: int):
    """Yield (rows, length) sample blocks; blocks are keyed by index so the
    stream is independent of how callers schedule them."""
    rows = max(1, _CHUNK // max(1, length))
    done = 0
    idx = 0
    while done < trials:
        take = min(rows, trials - done)
        seq = sample_sequence(spec, take * length, mix_seed(seed, idx))
        yield seq.samples.reshape(take, length)
        done += take
        idx += 1


def maximal_tail_empirical(
    spec: DistributionSpec, length: int, t: float, trials: int, seed: int
) -> EmpiricalTail:
    """Monte Carlo frequency of max_{1<=l<=L} |S_l| > t."""
    if t <= 0:
        raise ValueError("t must be > 0")
    if length < 1 or trials < 1:
        raise ValueError("need L >= 1 and trials >= 1")
    hits = 0
    for block in _iter_chunks(spec, length, trials, seed):
        walks = np.cumsum(block, axis=1)
        hits += int(np.count_nonzero(np.abs(walks).max(axis=1) > t))
    return EmpiricalTail(threshold=t, frequency=hits / trials, trials=trials)


def etemadi_check(
    spec: DistributionSpec, length: int, a: float, trials: int, seed: int
) -> tuple[EmpiricalTail, float]:
    """Empirical P[max_l |S_l| >= 3a] against 3 max_l P[|S_l| >= a], both
    estimated from the same trial ensemble."""
    if a <= 0:
        raise ValueError("a must be > 0")
    lhs_hits = 0
    per_step = np.zeros(length, dtype=np.int64)
    for block in _iter_chunks(spec, length, trials, seed):
        walks = np.abs(np.cumsum(block, axis=1))
        lhs_hits += int(np.count_nonzero(walks.max(axis=1) >= 3.0 * a))
        per_step += np.count_nonzero(walks >= a, axis=0)
    lhs = EmpiricalTail(threshold=3.0 * a, frequency=lhs_hits / trials, trials=trials)
    rhs = 3.0 * float(per_step.max()) / trials
    return lhs, rhs


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def berry_esseen_distance(spec: DistributionSpec, k: int, trials: int, seed: int) -> float:
    """Kolmogorov distance between the empirical law of S_k / sqrt(k) and the
    standard normal, by the sorted-sample sup formula."""
    if spec.sigma != 1.0:
        raise ValueError("Berry-Esseen check requires a unit-variance spec")
    if k < 1 or trials < 1:
        raise ValueError("need k >= 1 and trials >= 1")
    sums = np.empty(trials)
    done = 0
    if spec.kind == "rademacher":
        # S_k = 2 Binomial(k, 1/2) - k, drawn directly
        rng = np.random.Generator(np.random.Philox(key=mix_seed(seed, 0)))
        sums[:] = 2.0 * rng.binomial(k, 0.5, size=trials) - k
    else:
        for block in _iter_chunks(spec, k, trials, seed):
            take = block.shape[0]
            sums[done : done + take] = block.sum(axis=1)
            done += take
    z = np.sort(sums / math.sqrt(k))
    cdf = ndtr(z)
    grid = np.arange(1, trials + 1) / trials
    return float(np.maximum(grid - cdf, cdf - (grid - 1.0 / trials)).max())


def rosenthal_ratio(
    spec: DistributionSpec, p: float, ell: int, trials: int, seed: int
) -> float:
    """(E|S_l|^p)^(1/p) divided by max{(l E|X|^p)^(1/p), (l E X^2)^(1/2)}.

    Rosenthal's inequality says this stays below a constant depending only
    on p; the empirical numerator uses `trials` independent sums.
    """
    if p <= 2:
        raise ValueError("Rosenthal ratio needs p > 2")
    if not spec.has_abs_moment(p):
        raise ValueError(f"spec has infinite absolute moment of order {p}")
    if ell < 1 or trials < 1:
        raise ValueError("need ell >= 1 and trials >= 1")
    acc = 0.0
    for block in _iter_chunks(spec, ell, trials, seed):
        acc += float(np.sum(np.abs(block.sum(axis=1)) ** p))
    numer = (acc / trials) ** (1.0 / p)
    denom = max(
        (ell * spec.abs_moment(p)) ** (1.0 / p),
        math.sqrt(ell) * spec.sigma,
    )
    return numer / denom
