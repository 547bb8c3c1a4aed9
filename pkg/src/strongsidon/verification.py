"""Brute-force checking of the strong B_h condition and the related bounds.

Every violation is reported in cancelled form: common elements are removed
from both sides, which leaves two disjoint multisets of equal size ``t <= h``.
Cancellation never touches the overall maximum (it sits on one side only), so
the gap and the threshold are those of the original h-fold pair, and every
disjoint pair of size ``t <= h`` extends back to an h-fold violation by padding
both sides with the smallest element.  The verifier therefore enumerates
t-fold sums for ``t = 1..h``, sorts them and compares near neighbours only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .base_arith import alpha_length_bound
from .errors import ElementOutOfRange, NotConstructedElements, TooLarge
from .params import StrongParams, Threshold, jint

if TYPE_CHECKING:
    from .construction import ConstructedSet

DEFAULT_MEM_BUDGET = 2 * 1024 ** 3
# rough cost of one (sum, index tuple) entry in the sorted table
_BYTES_PER_SUM = 160


@dataclass(frozen=True)
class ViolationReport:
    left: tuple[int, ...]
    right: tuple[int, ...]
    gap: int
    threshold: float
    ell: Optional[int] = None

    @property
    def t(self) -> int:
        return len(self.left)

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.left, self.right

    def to_json(self) -> dict:
        d = {
            "left": [jint(x) for x in self.left],
            "right": [jint(x) for x in self.right],
            "gap": jint(self.gap),
            "threshold": self.threshold,
            "t": self.t,
        }
        if self.ell is not None:
            d["ell"] = self.ell
        return d


def sum_table_size(n: int, h: int) -> int:
    return sum(comb(n + t - 1, t) for t in range(1, h + 1))


def _strictly_increasing(elements: Sequence[int]) -> list[int]:
    xs = [int(x) for x in elements]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("elements must be strictly increasing")
    if xs and xs[0] < 1:
        raise ValueError("elements must be positive")
    return xs


def _scan(xs, h, in_window, violates, mem_budget):
    """Disjoint pairs of t-multisets (t <= h) flagged by ``violates``.

    ``in_window(gap, upper_sum)`` must be monotone along the sorted sums so the
    forward scan can stop at its first failure.
    """
    if sum_table_size(len(xs), h) * _BYTES_PER_SUM > mem_budget:
        raise TooLarge(
            f"{sum_table_size(len(xs), h)} sums for |S|={len(xs)}, h={h} exceed "
            f"the {mem_budget}-byte budget"
        )
    out = []
    for t in range(1, h + 1):
        table = sorted(
            (sum(xs[i] for i in idx), idx)
            for idx in combinations_with_replacement(range(len(xs)), t)
        )
        for a in range(len(table)):
            s_a, ia = table[a]
            for b in range(a + 1, len(table)):
                s_b, ib = table[b]
                gap = s_b - s_a
                if not in_window(gap, s_b):
                    break
                if not set(ia).isdisjoint(ib):
                    continue
                # index tuples are sorted, so the last index is the maximum
                if ia[-1] > ib[-1]:
                    hi, lo = ia, ib
                else:
                    hi, lo = ib, ia
                top = xs[hi[-1]]
                if violates(gap, top):
                    out.append((tuple(xs[i] for i in hi), tuple(xs[i] for i in lo), gap, top))
    return out


def check_strong_bh(
    elements: Sequence[int],
    params: StrongParams,
    mem_budget: int = DEFAULT_MEM_BUDGET,
) -> list[ViolationReport]:
    """All cancelled violations of the (alpha, gamma)-strong B_h condition.

    An empty list means the set is strong at the scale it is given.
    """
    xs = _strictly_increasing(elements)
    thr = params.threshold
    # the top element of a pair never exceeds the larger of the two sums; the
    # window test gap < gamma*s^alpha is monotone in s along the sorted order
    found = _scan(xs, params.h, thr.below, thr.below, mem_budget)
    return [ViolationReport(l, r, g, thr.value(top)) for l, r, g, top in found]


def check_n_finite(
    elements: Sequence[int],
    n: int,
    alpha: float,
    h: int,
    mem_budget: int = DEFAULT_MEM_BUDGET,
) -> list[ViolationReport]:
    """Violations of the n-finite condition: distinct multisets closer than n**alpha."""
    xs = _strictly_increasing(elements)
    if xs and xs[-1] > n:
        raise ElementOutOfRange(f"{xs[-1]} > n = {n}")
    thr = Threshold(alpha, 1)

    def fixed(gap, _top):
        return thr.below(gap, n)

    found = _scan(xs, h, fixed, fixed, mem_budget)
    return [ViolationReport(l, r, g, thr.value(n)) for l, r, g, _ in found]


@dataclass(frozen=True)
class ViolationDiagnostics:
    ell: int
    t: Optional[int]
    check_i: bool
    check_ii: bool
    check_iii: bool
    check_iv: bool

    @property
    def applicable(self) -> bool:
        """False when the digit sums already differ at the top position.

        Then no ``t`` exists; the length bound ``check_ii`` must be loose
        enough to allow ``ell == k_1`` for this to happen.
        """
        return self.t is not None

    @property
    def ok(self) -> bool:
        return self.check_ii and self.check_iii and self.check_iv


def classify_violation(report: ViolationReport, cset: "ConstructedSet") -> ViolationDiagnostics:
    """Digit-level anatomy of a violation among constructed elements.

    ``ell`` is the highest digit position where the two digit sums differ (0
    when they agree everywhere), ``t`` the number of leading summand pairs
    whose lengths exceed ``ell``.  The three checks are the length bound on
    ``ell``, the lower bound on ``ell**2`` and the divisibility of the product
    of prefix-product differences by ``q'_{ell+1} ... q'_{k_1}``.
    """
    if not cset.digits or cset.basis is None:
        raise NotConstructedElements("the set carries no digit data")
    by_value = cset.key_of_value()
    try:
        left = [cset.digits[by_value[v]] for v in sorted(report.left, reverse=True)]
        right = [cset.digits[by_value[v]] for v in sorted(report.right, reverse=True)]
    except KeyError as exc:
        raise NotConstructedElements(f"element {exc} has no digit data") from None
    if left[0].value < right[0].value:
        left, right = right, left
    h = cset.params.h
    alpha, gamma = cset.params.alpha, cset.params.gamma
    c = cset.c
    k = [d.length for d in left]
    kp = [d.length for d in right]
    k1 = k[0]

    ell = 0
    for i in range(k1, 0, -1):
        if sum(d.digit(i) for d in left) != sum(d.digit(i) for d in right):
            ell = i
            break

    check_ii = ell <= alpha_length_bound(k1, h, alpha, gamma) + 1 + 1e-9
    ts = [i for i in range(1, len(k) + 1) if ell < max(k[i - 1], kp[i - 1])]
    if not ts:
        return ViolationDiagnostics(ell, None, False, check_ii, False, False)
    t = max(ts)

    check_i = all(k[i] == kp[i] >= ell for i in range(t))
    check_iii = ell * ell >= (1 - c) * k[t - 1] ** 2 - c * sum(x * x for x in k[: t - 1]) - 1e-9

    keys_l = [by_value[d.value] for d in left]
    keys_r = [by_value[d.value] for d in right]
    prod = 1
    pl = pr = 1
    for j in range(t):
        pl *= keys_l[j]
        pr *= keys_r[j]
        prod *= pl - pr
    modulus = math.prod(cset.basis.base_primes[ell:k1])
    check_iv = prod % modulus == 0
    return ViolationDiagnostics(ell, t, check_i, check_ii, check_iii, check_iv)


def finite_upper_bound(n: int, alpha: float, h: int) -> float:
    return 2 * h ** (1 + 1 / h) * n ** ((1 - alpha) / h)


def infinite_upper_constant(alpha: float, h: int) -> float:
    denom = 2 ** ((1 - alpha) / h) - 1
    if denom <= 0:
        warnings.warn("the dyadic upper-bound constant diverges as alpha -> 1")
        return math.inf
    return 4 * h ** (1 + 1 / h) / denom


def dyadic_slices(elements: Iterable[int]) -> dict[int, list[int]]:
    """``S_i = S ∩ (2**i, 2**(i+1)]`` for every non-empty ``i >= 0``."""
    out: dict[int, list[int]] = {}
    for s in sorted(elements):
        if s < 2:
            continue
        i = (s - 1).bit_length() - 1
        out.setdefault(i, []).append(s)
    return out


@dataclass(frozen=True)
class UpperBoundCheck:
    kind: str  # "slice" or "count"
    n: int
    observed: int
    bound: float

    @property
    def ok(self) -> bool:
        return self.observed <= self.bound


def upper_bound_checks(
    elements: Sequence[int], alpha: float, h: int, checkpoints: Sequence[int]
) -> list[UpperBoundCheck]:
    """Dyadic slice sizes and the counting function against both upper bounds."""
    xs = sorted(elements)
    out = [
        UpperBoundCheck("slice", 2 ** i, len(sl), finite_upper_bound(2 ** i, alpha, h))
        for i, sl in sorted(dyadic_slices(xs).items())
    ]
    const = infinite_upper_constant(alpha, h)
    e = (1 - alpha) / h
    j = 0
    for n in checkpoints:
        while j < len(xs) and xs[j] <= n:
            j += 1
        out.append(UpperBoundCheck("count", n, j, const * n ** e))
    return out
