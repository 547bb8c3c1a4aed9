"""Primes, the prime partition P_{k,c}, basis selection and discrete logs."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from sympy import factorint, isprime, nextprime

from .base_arith import GeneralizedBasis
from .errors import InvalidC, NoLogarithm, NotPrime

PLAIN_SIEVE_LIMIT = 1 << 26
SEGMENT = 1 << 20

LOG_BASES = {"e": math.e, "2": 2.0, "10": 10.0}


def sieve(n: int) -> np.ndarray:
    """All primes ``<= n`` as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    if n > PLAIN_SIEVE_LIMIT:
        return primes_between(1, n)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if is_p[p]:
            is_p[p * p :: 2 * p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes ``p`` with ``lo < p <= hi`` (segmented above the plain limit)."""
    if hi <= lo or hi < 2:
        return np.zeros(0, dtype=np.int64)
    if hi <= PLAIN_SIEVE_LIMIT:
        ps = sieve(hi)
        return ps[ps > lo]
    small = sieve(math.isqrt(hi) + 1)
    chunks = []
    start = lo + 1
    while start <= hi:
        stop = min(start + SEGMENT, hi + 1)
        seg = np.ones(stop - start, dtype=bool)
        for p in small:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            seg[first - start :: p] = False
        if start <= 1:
            seg[: 2 - start] = False
        chunks.append(np.flatnonzero(seg) + start)
        start = stop
    return np.concatenate(chunks).astype(np.int64)


def f_ck(c: float, k: int, log_base: str = "e") -> float:
    """Correction term ``c k^2 / sqrt(log k)`` of the partition exponents."""
    if k < 2:
        raise ValueError("f(c, k) needs k >= 2")
    return c * k * k / math.sqrt(math.log(k, LOG_BASES[str(log_base)]))


def _floor_pow2(x: float) -> int:
    if x < 0:
        return 0
    return math.floor(2.0 ** x)


@dataclass
class PrimePartition:
    c: float
    log_base: str
    boundaries: dict[int, tuple[float, float]] = field(default_factory=dict)
    int_bounds: dict[int, tuple[int, int]] = field(default_factory=dict)
    parts: dict[int, list[int]] = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return max(self.parts)

    @property
    def cap(self) -> int:
        """Every prime up to this bound is materialised in some part."""
        return self.int_bounds[self.k_max][1]

    def part_of(self, p: int) -> Optional[int]:
        for k, (lo, hi) in self.int_bounds.items():
            if lo < p <= hi:
                return k
        return None

    def rows(self):
        for k in sorted(self.parts):
            lo, hi = self.boundaries[k]
            yield k, lo, hi, len(self.parts[k])


def partition_exponents(c: float, k: int, log_base: str = "e") -> tuple[float, float]:
    return (
        c * (k - 1) ** 2 - f_ck(c, k - 1, log_base),
        c * k * k - f_ck(c, k, log_base),
    )


def prime_partition(c: float, k_max: int, log_base: str = "e") -> PrimePartition:
    if not 0 < c < 0.5:
        raise InvalidC(f"c must lie in (0, 1/2), got {c}")
    if k_max < 3:
        raise ValueError("k_max must be >= 3")
    part = PrimePartition(c, str(log_base))
    for k in range(3, k_max + 1):
        lo, hi = partition_exponents(c, k, log_base)
        part.boundaries[k] = (lo, hi)
        part.int_bounds[k] = (_floor_pow2(lo), _floor_pow2(hi))
    # one sieve for the whole range; parts are slices of it
    top = max(hi for _, hi in part.int_bounds.values())
    ps = sieve(top)
    for k, (lo, hi) in part.int_bounds.items():
        part.parts[k] = [int(p) for p in ps[(ps > lo) & (ps <= hi)]]
    return part


def basis_window(i: int) -> tuple[int, int]:
    """``(2**(2i-1), 2**(2i+1)]`` as (exclusive low, inclusive high)."""
    return 2 ** (2 * i - 1), 2 ** (2 * i + 1)


def basis_primes(
    count: int,
    h: int,
    strategy: str = "smallest",
    seed: Optional[int] = None,
) -> GeneralizedBasis:
    if count < 1:
        raise ValueError("count must be >= 1")
    if strategy in ("random", "uniform-random"):
        strategy = "uniform-random"
        rng = random.Random(seed)
    elif strategy != "smallest":
        raise ValueError(f"unknown basis strategy {strategy!r}")
    qs = []
    for i in range(1, count + 1):
        lo, hi = basis_window(i)
        if strategy == "smallest":
            q = nextprime(lo)
        else:
            # rejection sampling is exactly uniform over the primes in the window
            while True:
                q = rng.randint(lo + 1, hi)
                if isprime(q):
                    break
        qs.append(int(q))
    roots = [primitive_root(q) for q in qs]
    return GeneralizedBasis(h, tuple(qs), tuple(roots), strategy, seed)


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest generator of the multiplicative group mod the prime ``q``."""
    if not isprime(q):
        raise NotPrime(f"{q} is not prime")
    if q == 2:
        return 1
    order = q - 1
    cofactors = [order // r for r in factorint(order)]
    for g in range(2, q):
        if all(pow(g, e, q) != 1 for e in cofactors):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


@lru_cache(maxsize=64)
def _baby_steps(g: int, q: int) -> tuple[int, dict[int, int], int]:
    m = math.isqrt(q - 1) + 1
    table = {}
    x = 1
    for j in range(m):
        table.setdefault(x, j)
        x = x * g % q
    return m, table, pow(g, -m, q)


def discrete_log(target: int, g: int, q: int) -> int:
    """Exponent ``e`` in ``[0, q-2]`` with ``g**e == target (mod q)``.

    Baby-step giant-step; the baby-step table is cached per ``(g, q)``.
    """
    target %= q
    if target == 0:
        raise NoLogarithm(f"{target} has no logarithm modulo {q}")
    m, table, giant = _baby_steps(g, q)
    y = target
    for i in range(m + 1):
        j = table.get(y)
        if j is not None:
            return (i * m + j) % (q - 1)
        y = y * giant % q
    raise NoLogarithm(f"{g} does not generate {target} modulo {q}")
