import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from strongsidon.base_arith import (
    DigitElement,
    GeneralizedBasis,
    alpha_length_bound,
    digit_band,
    digit_multiplicity,
    digits,
    from_digits,
    length_bounds,
)
from strongsidon.construction import element_for_prime
from strongsidon.errors import BasisTooShort, InvalidDigit, NotInAnyBand
from strongsidon.prime_tools import basis_primes

from oracles import long_division_digits

B2 = GeneralizedBasis(2, (3, 11), (2, 2))


def test_radices_are_h_squared_multiples():
    assert B2.radices == (12, 44)
    assert basis_primes(1, 3).radices == (27,)


def test_digits_examples():
    assert digits(0, B2).digits == ()
    assert digits(0, B2).length == 0
    assert digits(5, B2).digits == (5,)
    d = digits(173, B2)
    assert d.digits == (5, 14) and d.length == 2


def test_from_digits_examples():
    assert from_digits(DigitElement(0, (), B2)) == 0
    assert from_digits(DigitElement(5, (5,)), (12, 44)) == 5
    assert from_digits(DigitElement(173, (5, 14)), (12, 44)) == 173


def test_digits_rejects_out_of_capacity():
    with pytest.raises(BasisTooShort):
        digits(12 * 44, B2)


@pytest.mark.parametrize("bad", [(12,), (5, 44), (5, 0), (1, 1, 1)])
def test_from_digits_rejects_invalid(bad):
    with pytest.raises(InvalidDigit):
        from_digits(DigitElement(0, bad), (12, 44))


def test_digits_match_long_division():
    basis = basis_primes(8, 3)
    rng = random.Random(5)
    for _ in range(300):
        a = rng.randrange(basis.capacity())
        assert list(digits(a, basis).digits) == long_division_digits(a, basis.radices)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 3), st.data())
def test_round_trip(h, data):
    basis = basis_primes(12, h)
    a = data.draw(st.integers(0, basis.capacity() - 1))
    d = digits(a, basis)
    assert from_digits(d) == a
    assert all(0 <= x < q for x, q in zip(d.digits, basis.radices))
    if d.digits:
        assert d.digits[-1] != 0


def test_length_bounds_examples():
    assert length_bounds(2, 2) == (8, 4096)
    assert 8 < 173 < 4096
    assert length_bounds(1, 2) == (1, 32)
    assert length_bounds(1, 3) == (1, 72)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 3), st.integers(2, 10), st.integers(0, 2 ** 64), st.integers(0, 10 ** 6))
def test_sandwich(h, k, salt, seed):
    # any valid basis, any value of length exactly k
    basis = basis_primes(k, h, "random", seed)
    lo_cap, hi_cap = basis.capacity(k - 1), basis.capacity(k)
    a = lo_cap + salt % (hi_cap - lo_cap)
    assert digits(a, basis).length == k
    lo, hi = length_bounds(k, h)
    assert lo < a < hi


def test_sandwich_k1_edge():
    lo, hi = length_bounds(1, 2)
    assert lo == 1 and digits(1, B2).length == 1  # equality, not strict


def test_alpha_length_bound_examples():
    assert alpha_length_bound(4, 2, 0.5, 1) == pytest.approx(4.0)
    assert alpha_length_bound(7, 3, 0.0, 1) == 0
    assert alpha_length_bound(3, 2, 0.0, 4) == pytest.approx(math.sqrt(2), abs=1e-5)


def test_alpha_length_bound_dominates_threshold_length():
    rng = random.Random(1)
    for _ in range(200):
        h = rng.choice([2, 3])
        basis = basis_primes(10, h, "random", rng.randrange(1000))
        alpha = rng.choice([0.1, 0.3, 0.5, 0.8])
        gamma = rng.choice([1, 2, 10, 1000])
        k = rng.randrange(2, 9)
        a = rng.randrange(basis.capacity(k - 1), basis.capacity(k))
        b = alpha_length_bound(k, h, alpha, gamma)
        if b >= 1:
            t = math.floor(gamma * a ** alpha)
            assert digits(t, basis).length <= b + 1e-9


def test_digit_multiplicity_examples():
    assert digit_multiplicity(0, 3, 2) == 0
    assert digit_multiplicity(5, 3, 2) == 1
    assert digit_multiplicity(9, 3, 2) == 2
    with pytest.raises(NotInAnyBand):
        digit_multiplicity(6, 3, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 10 ** 6), st.integers(2, 8))
def test_bands_disjoint(q, h):
    bands = [digit_band(m, q, h) for m in range(h + 1)]
    for (lo1, hi1), (lo2, hi2) in zip(bands, bands[1:]):
        assert hi1 < lo2
    for m, (lo, hi) in enumerate(bands[1:], start=1):
        assert digit_multiplicity(lo, q, h) == m
        assert digit_multiplicity(hi, q, h) == m


def test_no_carry_on_constructed_prefix():
    from itertools import combinations_with_replacement

    for h in (2, 3):
        basis = basis_primes(5, h)
        els = [element_for_prime(p, k, basis) for p, k in [(5, 2), (7, 3), (13, 3), (17, 4), (19, 5), (23, 5)]]
        for t in range(1, h + 1):
            for combo in combinations_with_replacement(els, t):
                s = digits(sum(e.value for e in combo), basis)
                k = max(e.length for e in combo)
                assert s.length == k
                for i in range(1, k + 1):
                    assert s.digit(i) == sum(e.digit(i) for e in combo)
