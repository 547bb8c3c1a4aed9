"""Prime-indexed strong B_h sets, their pruning, and the greedy construction."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .base_arith import DigitElement, GeneralizedBasis
from .errors import PrimeCollision
from .params import StrongParams, Threshold, jint
from .prime_tools import discrete_log, prime_partition
from .verification import DEFAULT_MEM_BUDGET, check_strong_bh

log = logging.getLogger(__name__)

__all__ = [
    "StrongParams",
    "ConstructedSet",
    "element_for_prime",
    "build_set",
    "optimal_c",
    "find_bad_primes",
    "prune",
    "pruning_report",
    "greedy_strong_bh",
]


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get("STRONGSIDON_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ConstructedSet:
    """A finite prefix of a strong-set construction.

    ``elements`` maps an index key to the element value: the indexing prime
    for prime-indexed sets, the value itself otherwise.  ``digits`` holds the
    digit expansion for prime-indexed sets only.
    """

    params: StrongParams
    provenance: str
    elements: dict[int, int] = field(default_factory=dict)
    digits: dict[int, DigitElement] = field(default_factory=dict)
    basis: Optional[GeneralizedBasis] = None
    c: Optional[float] = None
    k_max: Optional[int] = None
    log_base: str = "e"
    pruned: set[int] = field(default_factory=set)
    skipped: set[int] = field(default_factory=set)

    def __len__(self):
        return len(self.elements)

    def values(self) -> list[int]:
        return sorted(self.elements.values())

    def key_of_value(self) -> dict[int, int]:
        return {v: k for k, v in self.elements.items()}

    def count(self, n: int) -> int:
        return sum(1 for v in self.elements.values() if v <= n)

    def without(self, keys) -> "ConstructedSet":
        keys = set(keys)
        return ConstructedSet(
            params=self.params,
            provenance=self.provenance,
            elements={k: v for k, v in self.elements.items() if k not in keys},
            digits={k: d for k, d in self.digits.items() if k not in keys},
            basis=self.basis,
            c=self.c,
            k_max=self.k_max,
            log_base=self.log_base,
            pruned=self.pruned | (keys & self.elements.keys()),
            skipped=set(self.skipped),
        )

    def to_json(self) -> dict:
        d = {
            "h": self.params.h,
            "alpha": float(self.params.alpha),
            "gamma": float(self.params.gamma),
            "c": self.c,
            "provenance": self.provenance,
            "basis": self.basis.to_json() if self.basis else None,
            "k_max": self.k_max,
            "f_log_base": self.log_base,
            "elements": [str(v) for v in self.values()],
            "pruned": [jint(p) for p in sorted(self.pruned)],
            "skipped": [jint(p) for p in sorted(self.skipped)],
        }
        if self.digits:
            d["digit_data"] = [
                {"prime": jint(p), **self.digits[p].to_json()}
                for p in sorted(self.digits, key=lambda p: self.elements[p])
            ]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ConstructedSet":
        params = StrongParams(int(d.get("h", 2)), float(d.get("alpha", 0)), float(d.get("gamma", 1)))
        basis = GeneralizedBasis.from_json(d["basis"]) if d.get("basis") else None
        out = cls(
            params=params,
            provenance=d.get("provenance", "external"),
            basis=basis,
            c=d.get("c"),
            k_max=d.get("k_max"),
            log_base=str(d.get("f_log_base", "e")),
            pruned={int(p) for p in d.get("pruned", [])},
            skipped={int(p) for p in d.get("skipped", [])},
        )
        if d.get("digit_data"):
            for item in d["digit_data"]:
                p = int(item["prime"])
                v = int(item["value"])
                out.elements[p] = v
                out.digits[p] = DigitElement(v, tuple(item["digits"]), basis)
        else:
            out.elements = {int(v): int(v) for v in d["elements"]}
        return out


def element_for_prime(p: int, k: int, basis: GeneralizedBasis) -> DigitElement:
    """The length-``k`` element indexed by ``p``.

    Digit ``i`` is the representative of ``log_{g_i} p (mod q_i' - 1)`` lying in
    ``[(h-1) q_i' + 1, h q_i' - 1]``, an interval of exactly ``q_i' - 1`` integers.
    """
    if k > len(basis):
        raise ValueError(f"basis has {len(basis)} primes, length {k} requested")
    h = basis.h
    xs = []
    value = 0
    place = 1
    for q, g, radix in zip(basis.base_primes[:k], basis.prim_roots, basis.radices):
        if p % q == 0:
            raise PrimeCollision(f"p={p} is divisible by the basis prime {q}")
        e = discrete_log(p, g, q)
        lo = (h - 1) * q + 1
        x = lo + (e - lo) % (q - 1)
        xs.append(x)
        value += x * place
        place *= radix
    return DigitElement(value, tuple(xs), basis)


def build_set(
    c: float,
    params: StrongParams,
    basis: GeneralizedBasis,
    k_max: int,
    log_base: str = "e",
) -> ConstructedSet:
    if k_max > len(basis):
        raise ValueError(f"k_max={k_max} exceeds the basis length {len(basis)}")
    if basis.h != params.h:
        raise ValueError("basis and parameters disagree on h")
    part = prime_partition(c, k_max, log_base)
    jobs = [(p, k) for k in sorted(part.parts) for p in part.parts[k]]

    def make(job):
        p, k = job
        try:
            return p, element_for_prime(p, k, basis)
        except PrimeCollision:
            return p, None

    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            made = list(pool.map(make, jobs))
    else:
        made = [make(j) for j in jobs]

    out = ConstructedSet(params, "cilleruelo", basis=basis, c=c, k_max=k_max, log_base=str(log_base))
    for p, el in made:
        if el is None:
            log.info("skipping prime %d: it divides a basis prime", p)
            out.skipped.add(p)
            continue
        out.elements[p] = el.value
        out.digits[p] = el
    return out


def optimal_c(alpha: float, h: int) -> float:
    """Positive root of ``c**2 + (2h - 2 + alpha) c + alpha - 1``."""
    b = h - 1 + alpha / 2
    # sqrt(b^2 + r) - b rewritten to avoid cancellation
    r = 1 - alpha
    return r / (math.sqrt(b * b + r) + b)


def find_bad_primes(cset: ConstructedSet, mem_budget: int = DEFAULT_MEM_BUDGET) -> set[int]:
    """Keys whose element is the largest member of some violating tuple pair."""
    keys = cset.key_of_value()
    found = check_strong_bh(cset.values(), cset.params, mem_budget)
    return {keys[max(v.left)] for v in found}


def prune(cset: ConstructedSet, mem_budget: int = DEFAULT_MEM_BUDGET) -> ConstructedSet:
    return cset.without(find_bad_primes(cset, mem_budget))


def pruning_report(cset: ConstructedSet, bad: set[int]) -> list[tuple[int, int, int, float]]:
    """Rows ``(k, part_size, bad_count, fraction)`` per element length."""
    sizes: dict[int, int] = {}
    bads: dict[int, int] = {}
    for p, d in cset.digits.items():
        sizes[d.length] = sizes.get(d.length, 0) + 1
        if p in bad:
            bads[d.length] = bads.get(d.length, 0) + 1
    return [
        (k, sizes[k], bads.get(k, 0), bads.get(k, 0) / sizes[k])
        for k in sorted(sizes)
    ]


class _GreedyState:
    """Sum and difference sets of the current greedy prefix.

    A candidate ``m`` above every current element closes a violation iff for
    some ``1 <= j <= t <= h`` there are a t-fold sum ``r`` and a (t-j)-fold
    sum ``s`` of current elements with ``|j*m - (r - s)| < gamma * m**alpha``
    (``j`` counts the copies of ``m`` on its side; ``m`` cannot appear on the
    other side).  Differences ``r - s`` are kept per ``(t, j)`` as sorted arrays.
    """

    def __init__(self, h: int):
        self.h = h
        self.sums = [np.zeros(1, dtype=np.int64)] + [np.zeros(0, dtype=np.int64) for _ in range(h)]
        self.diffs = {
            (t, j): np.zeros(0, dtype=np.int64) for t in range(1, h + 1) for j in range(1, t + 1)
        }

    def add(self, e: int):
        old = self.sums
        new = [old[0]]
        fresh = [np.zeros(0, dtype=np.int64)]
        for u in range(1, self.h + 1):
            grown = np.union1d(old[u], new[u - 1] + e)
            new.append(grown)
            fresh.append(np.setdiff1d(grown, old[u], assume_unique=True))
        for (t, j), d in self.diffs.items():
            parts = [d]
            if fresh[t].size and new[t - j].size:
                parts.append((fresh[t][:, None] - new[t - j][None, :]).ravel())
            if fresh[t - j].size and new[t].size:
                parts.append((new[t][:, None] - fresh[t - j][None, :]).ravel())
            self.diffs[(t, j)] = np.unique(np.concatenate(parts))
        self.sums = new

    def forbidden(self, ms: np.ndarray, w: np.ndarray) -> np.ndarray:
        bad = np.zeros(ms.shape, dtype=bool)
        for (_, j), d in self.diffs.items():
            if not d.size:
                continue
            lo = np.searchsorted(d, j * ms - w, side="left")
            hi = np.searchsorted(d, j * ms + w, side="right")
            bad |= hi > lo
        return bad


def _window_widths(ms: np.ndarray, thr: Threshold) -> np.ndarray:
    """Largest integer below ``gamma * m**alpha`` for each candidate."""
    theta = float(thr.gamma) * ms.astype(np.float64) ** float(thr.alpha)
    w = np.ceil(theta).astype(np.int64) - 1
    frac = theta - np.floor(theta)
    shaky = np.flatnonzero((frac < 1e-9) | (frac > 1 - 1e-9))
    for i in shaky:
        w[i] = thr.max_below(int(ms[i]))
    return w


def greedy_strong_bh(params: StrongParams, n_max: int, chunk: int = 4096) -> ConstructedSet:
    """Scan ``1..n_max`` and keep every integer that leaves the set strong."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.h * n_max >= 2 ** 62:
        raise OverflowError("n_max too large for 64-bit sum tables")
    thr = params.threshold
    state = _GreedyState(params.h)
    chosen: list[int] = []
    m = 1
    size = chunk
    while m <= n_max:
        ms = np.arange(m, min(m + size, n_max + 1), dtype=np.int64)
        ok = np.flatnonzero(~state.forbidden(ms, _window_widths(ms, thr)))
        if ok.size:
            e = int(ms[ok[0]])
            chosen.append(e)
            state.add(e)
            m = e + 1
            size = chunk
        else:
            m = int(ms[-1]) + 1
            size = min(size * 2, 1 << 16)
    return ConstructedSet(params, "greedy", elements={v: v for v in chosen})
