"""The random set R_delta, its interval decomposition, and the strong-set transfer.

R_delta keeps each ``m >= 1`` independently with probability ``m**(delta-1)``.
The positive integers split into ``I_i = [i**(1/delta), (i+1)**(1/delta))``,
so ``m`` lies in ``I_i`` exactly when ``i = floor(m**delta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .construction import ConstructedSet
from .errors import NotFound, ParamMismatch, TooLarge
from .params import as_fraction
from .verification import check_strong_bh

_EXACT_LIMIT = 100
_CHUNK = 1 << 22
# the exact product visits every integer below lower(i_max + 1)
MAX_PRODUCT_TERMS = 1 << 32


def _rational_delta(delta: float) -> Optional[Fraction]:
    fr = as_fraction(delta)
    if fr is None or fr.numerator > _EXACT_LIMIT or fr.denominator > _EXACT_LIMIT:
        return None
    return fr


def _iroot(x: int, n: int) -> int:
    """floor(x ** (1/n)) for non-negative integers."""
    if x < 2 or n == 1:
        return x
    r = int(round(x ** (1.0 / n))) if x.bit_length() < 1000 else 1 << (x.bit_length() // n)
    while r ** n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def _check_delta(delta):
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def interval_lower(i: int, delta: float) -> int:
    """``ceil(i ** (1/delta))``, the smallest member of ``I_i``."""
    _check_delta(delta)
    i = int(i)
    fr = _rational_delta(delta)
    if fr is not None:
        a, b = fr.numerator, fr.denominator
        # smallest n with n**a >= i**b
        x = i ** b
        r = _iroot(x, a)
        return r if r ** a == x else r + 1
    return math.ceil(i ** (1 / delta))


def interval_of(m: int, delta: float) -> int:
    """The unique ``i`` with ``m`` in ``I_i``, i.e. ``floor(m ** delta)``."""
    _check_delta(delta)
    m = int(m)
    if m < 1:
        raise ValueError("intervals cover the positive integers only")
    fr = _rational_delta(delta)
    if fr is not None:
        a, b = fr.numerator, fr.denominator
        return _iroot(m ** a, b)
    i = math.floor(m ** delta)
    while interval_lower(i + 1, delta) <= m:
        i += 1
    while i > 1 and interval_lower(i, delta) > m:
        i -= 1
    return i


@dataclass(frozen=True)
class IntervalIndex:
    i: int
    lower: int
    upper_exclusive: int

    def __len__(self):
        return self.upper_exclusive - self.lower

    def __contains__(self, m):
        return self.lower <= m < self.upper_exclusive


def interval(i: int, delta: float) -> IntervalIndex:
    if i < 1:
        raise ValueError("interval indices start at 1")
    return IntervalIndex(i, interval_lower(i, delta), interval_lower(i + 1, delta))


def interval_lowers(i_max: int, delta: float) -> np.ndarray:
    """``lower(i)`` for ``i = 1..i_max+1`` (float estimate, exact near integers)."""
    _check_delta(delta)
    idx = np.arange(1, i_max + 2, dtype=np.float64)
    v = idx ** (1.0 / delta)
    out = np.ceil(v).astype(np.int64)
    frac = v - np.floor(v)
    for j in np.flatnonzero((frac < 1e-7) | (frac > 1 - 1e-7)):
        out[j] = interval_lower(j + 1, delta)
    return out


def intersection_probabilities(i_max: int, delta: float) -> np.ndarray:
    """``P(R_delta meets I_i)`` for ``i = 1..i_max`` (index 0 is ``i = 1``)."""
    _check_delta(delta)
    if (i_max + 1) ** (1 / delta) > MAX_PRODUCT_TERMS:
        raise TooLarge(f"i_max={i_max} at delta={delta} needs more than {MAX_PRODUCT_TERMS} factors")
    bounds = interval_lowers(i_max, delta)
    # log P(miss) = sum over I_i of log(1 - m**(delta-1)); m = 1 is always hit
    top = int(bounds[-1])
    cum = np.empty(len(bounds), dtype=np.float64)  # sum_{2 <= m < bound}
    running = 0.0
    j = 0
    while j < len(bounds) and bounds[j] <= 2:
        cum[j] = 0.0
        j += 1
    start = 2
    while start < top:
        stop = min(start + _CHUNK, top)
        m = np.arange(start, stop, dtype=np.float64)
        vals = np.log1p(-(m ** (delta - 1))) if delta < 1 else np.full(m.shape, -np.inf)
        cs = running + np.cumsum(vals)
        while j < len(bounds) and bounds[j] <= stop:
            b = int(bounds[j])
            cum[j] = running if b == start else cs[b - 1 - start]
            j += 1
        running = float(cs[-1])
        start = stop
    with np.errstate(invalid="ignore"):
        log_miss = cum[1:] - cum[:-1]
    out = -np.expm1(log_miss)
    out[np.isnan(out)] = 1.0
    out[bounds[:-1] <= 1] = 1.0
    return out


def intersection_probability(i: int, delta: float) -> float:
    iv = interval(i, delta)
    if iv.lower <= 1 or delta == 1:
        return 1.0
    m = np.arange(iv.lower, iv.upper_exclusive, dtype=np.float64)
    return float(-np.expm1(np.sum(np.log1p(-(m ** (delta - 1))))))


def find_i0(delta: float, i_cap: int) -> int:
    """Least ``i0`` with hit probability ``>= 1/3`` on every ``i0 <= i <= i_cap``."""
    probs = intersection_probabilities(i_cap, delta)
    low = np.flatnonzero(probs < 1 / 3)
    i0 = 1 if not low.size else int(low[-1]) + 2
    if i0 > i_cap:
        raise NotFound(f"hit probability stays below 1/3 up to i = {i_cap}")
    return i0


@dataclass
class RandomSample:
    delta: float
    n_max: int
    seed: int
    members: np.ndarray

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "n_max": self.n_max,
            "seed": self.seed,
            "members": [int(x) for x in self.members],
        }

    def __contains__(self, m):
        k = np.searchsorted(self.members, m)
        return k < len(self.members) and self.members[k] == m


def sample_r_delta(delta: float, n_max: int, seed: int) -> RandomSample:
    _check_delta(delta)
    rng = np.random.default_rng(seed)
    m = np.arange(1, n_max + 1, dtype=np.int64)
    u = rng.random(n_max)
    keep = u < m.astype(np.float64) ** (delta - 1)
    return RandomSample(delta, n_max, seed, m[keep])


def monte_carlo_hits(
    delta: float, i_max: int, n_trials: int, seed: int = 0
) -> list[tuple[int, float, float, int]]:
    """Rows ``(i, exact_p, empirical_p, n_trials)`` for ``i = 1..i_max``.

    Replication ``r`` draws from a generator seeded with ``(seed, r)``.
    """
    bounds = interval_lowers(i_max, delta)
    top = int(bounds[-1]) - 1
    p = np.arange(1, top + 1, dtype=np.float64) ** (delta - 1)
    starts = bounds[:-1] - 1
    hits = np.zeros(i_max, dtype=np.int64)
    for r in range(n_trials):
        u = np.random.default_rng([seed, r]).random(top)
        hits += np.logical_or.reduceat(u < p, starts)
    exact = intersection_probabilities(i_max, delta)
    return [(i + 1, float(exact[i]), hits[i] / n_trials, n_trials) for i in range(i_max)]


def thin_per_interval(values: Sequence[int], delta: float) -> dict[int, int]:
    """Keep the smallest element of each interval; maps interval index to it."""
    kept: dict[int, int] = {}
    for s in sorted(values):
        kept.setdefault(interval_of(s, delta), s)
    return kept


def max_per_interval(values: Sequence[int], delta: float) -> int:
    counts: dict[int, int] = {}
    for s in values:
        i = interval_of(s, delta)
        counts[i] = counts.get(i, 0) + 1
    return max(counts.values(), default=0)


def transfer(strong: ConstructedSet, sample: RandomSample, verify: bool = True) -> list[int]:
    """Move each element of a strong set onto a member of ``sample`` in its interval."""
    delta = sample.delta
    h = strong.params.h
    alpha, gamma = strong.params.alpha, strong.params.gamma
    if alpha < 1 - delta - 1e-12:
        raise ParamMismatch(f"alpha={alpha} is below 1 - delta = {1 - delta}")
    need = h * 2 ** (1 / delta)
    if gamma < need * (1 - 1e-12):
        raise ParamMismatch(f"gamma={gamma} is below h * 2**(1/delta) = {need}")
    values = strong.values()
    if verify and check_strong_bh(values, strong.params):
        raise ParamMismatch("the input set is not strong at its declared parameters")

    i0 = find_i0(delta, interval_of(sample.n_max, delta))
    members = sample.members
    out = []
    for i, s in sorted(thin_per_interval(values, delta).items()):
        if i < i0:
            continue
        if s in sample:
            out.append(s)
            continue
        lo, hi = interval_lower(i, delta), interval_lower(i + 1, delta)
        k = int(np.searchsorted(members, lo))
        if k < len(members) and members[k] < hi:
            out.append(int(members[k]))
    return sorted(out)


def random_exponent(delta: float, h: int) -> float:
    b = h - 1 + (1 - delta) / 2
    return math.sqrt(b * b + delta) - b
