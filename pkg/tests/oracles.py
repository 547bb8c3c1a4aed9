"""Slow, independently written reference implementations used by the tests."""
from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement, product
import math


def _cancel(a, b):
    ca, cb = Counter(a), Counter(b)
    common = ca & cb
    return tuple(sorted((ca - common).elements())), tuple(sorted((cb - common).elements()))


def _below(gap, gamma, top, alpha):
    thr = gamma * top ** alpha
    if abs(abs(gap) - thr) > 1e-6 * thr + 1e-9:
        return abs(gap) < thr
    # near a tie: exact when alpha is a small fraction, otherwise plain floats
    fa = Fraction(alpha).limit_denominator(100)
    if abs(float(fa) - alpha) < 1e-15:
        g = Fraction(gamma).limit_denominator(10 ** 6)
        p, q = fa.numerator, fa.denominator
        return Fraction(abs(gap)) ** q < g ** q * Fraction(top) ** p
    return abs(gap) < gamma * top ** alpha


def naive_strong_violations(elements, h, alpha, gamma):
    """Every h-multiset pair with distinct maxima that is too close, cancelled.

    Returns a set of ``(larger-max side, other side)`` tuples.
    """
    xs = sorted(elements)
    tuples = list(combinations_with_replacement(xs, h))
    out = set()
    for a in tuples:
        for b in tuples:
            if max(a) <= max(b):
                continue
            if _below(sum(a) - sum(b), gamma, max(a), alpha):
                out.add(_cancel(a, b))
    return out


def naive_is_strong(elements, h, alpha, gamma):
    return not naive_strong_violations(elements, h, alpha, gamma)


def naive_n_finite_violations(elements, n, alpha, h):
    xs = sorted(elements)
    tuples = list(combinations_with_replacement(xs, h))
    out = set()
    for a, b in product(tuples, repeat=2):
        if a == b:
            continue
        if _below(sum(a) - sum(b), 1, n, alpha):
            l, r = _cancel(a, b)
            if max(l) > max(r):
                out.add((l, r))
    return out


def naive_greedy(h, alpha, gamma, n_max):
    chosen = []
    for m in range(1, n_max + 1):
        if naive_is_strong(chosen + [m], h, alpha, gamma):
            chosen.append(m)
    return chosen


def mian_chowla(n_max):
    """Classical greedy Sidon sequence: keep m when no pair sum repeats."""
    seq, sums = [], set()
    for m in range(1, n_max + 1):
        new = {m + a for a in seq} | {2 * m}
        if not new & sums:
            sums |= new
            seq.append(m)
    return seq


def is_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def mult_order(g, q):
    x, k = g % q, 1
    while x != 1:
        x = x * g % q
        k += 1
    return k


def long_division_digits(a, radices):
    out = []
    for r in radices:
        if a == 0:
            break
        a, d = divmod(a, r)
        out.append(d)
    assert a == 0
    return out
