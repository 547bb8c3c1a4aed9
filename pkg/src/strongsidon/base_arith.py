"""Mixed-radix integer representation over a generalised basis.

A generalised basis is a sequence of radices ``q_i = h**2 * q_i'`` where each
``q_i'`` is a prime in the window ``(2**(2i-1), 2**(2i+1)]``.  An integer ``a``
is written little-endian as

    a = x_1 + x_2*q_1 + x_3*q_1*q_2 + ... + x_k*q_1*...*q_{k-1}

with ``0 <= x_i < q_i`` and ``x_k != 0``; ``k`` is the length of ``a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import BasisTooShort, InvalidDigit, NotInAnyBand


@dataclass(frozen=True)
class GeneralizedBasis:
    h: int
    base_primes: tuple[int, ...]
    prim_roots: tuple[int, ...]
    strategy: str = "smallest"
    seed: Optional[int] = None
    radices: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.h < 2:
            raise ValueError(f"h must be >= 2, got {self.h}")
        object.__setattr__(self, "base_primes", tuple(int(q) for q in self.base_primes))
        object.__setattr__(self, "prim_roots", tuple(int(g) for g in self.prim_roots))
        if len(self.base_primes) != len(self.prim_roots):
            raise ValueError("one primitive root is needed per base prime")
        object.__setattr__(self, "radices", tuple(self.h * self.h * q for q in self.base_primes))

    def __len__(self):
        return len(self.base_primes)

    def capacity(self, m: Optional[int] = None) -> int:
        """Product of the first ``m`` radices (all of them by default)."""
        m = len(self) if m is None else m
        return math.prod(self.radices[:m])

    def place_values(self, k: int) -> list[int]:
        """``[1, q_1, q_1 q_2, ..., q_1...q_{k-1}]``."""
        out = [1]
        for q in self.radices[: k - 1]:
            out.append(out[-1] * q)
        return out[:k]

    def window_ok(self) -> bool:
        return all(
            2 ** (2 * i - 1) < q <= 2 ** (2 * i + 1)
            for i, q in enumerate(self.base_primes, start=1)
        )

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "q_primes": list(self.base_primes),
            "prim_roots": list(self.prim_roots),
            "strategy": self.strategy,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "GeneralizedBasis":
        return cls(
            h=int(d["h"]),
            base_primes=tuple(d["q_primes"]),
            prim_roots=tuple(d["prim_roots"]),
            strategy=d.get("strategy", "external"),
            seed=d.get("seed"),
        )


@dataclass(frozen=True)
class DigitElement:
    value: int
    digits: tuple[int, ...]
    basis: Optional[GeneralizedBasis] = field(default=None, compare=False, repr=False)

    @property
    def length(self) -> int:
        return len(self.digits)

    def digit(self, i: int) -> int:
        """1-based digit access; digits beyond the length are zero."""
        return self.digits[i - 1] if 1 <= i <= len(self.digits) else 0

    def to_json(self) -> dict:
        return {"value": str(self.value), "digits": list(self.digits)}


def digits(a: int, basis: GeneralizedBasis) -> DigitElement:
    if a < 0:
        raise ValueError("only non-negative integers have a digit expansion")
    if a >= basis.capacity():
        raise BasisTooShort(
            f"{a} needs more than the {len(basis)} radices available"
        )
    out = []
    rest = a
    for q in basis.radices:
        if not rest:
            break
        rest, x = divmod(rest, q)
        out.append(x)
    return DigitElement(a, tuple(out), basis)


def from_digits(d: DigitElement, radices: Optional[Sequence[int]] = None) -> int:
    """Evaluate a digit vector; validates every digit against its radix."""
    if radices is None:
        if d.basis is None:
            raise ValueError("a basis or explicit radices are required")
        radices = d.basis.radices
    xs = d.digits
    if len(xs) > len(radices):
        raise InvalidDigit(f"{len(xs)} digits but only {len(radices)} radices")
    if xs and xs[-1] == 0:
        raise InvalidDigit("trailing digit must be non-zero")
    value = 0
    place = 1
    for i, (x, q) in enumerate(zip(xs, radices), start=1):
        if not 0 <= x < q:
            raise InvalidDigit(f"digit x_{i}={x} outside [0, {q})")
        value += x * place
        place *= q
    return value


def length_bounds(k: int, h: int) -> tuple[int, int]:
    """Magnitude sandwich for a length-``k`` integer over any valid basis.

    Strict on both sides for ``k >= 2``; for ``k == 1`` the value 1 meets the
    lower bound with equality.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return h ** (2 * k - 2) * 2 ** (k * k - 2 * k + 1), h ** (2 * k) * 2 ** (k * k + 2 * k)


def alpha_length_bound(k: int, h: int, alpha: float, gamma: float) -> float:
    # Raw formula; yields 0 at alpha=0, gamma=1 although len(1) == 1.
    return math.sqrt(
        alpha * k * k + (math.log2(h) + 1) * 2 * alpha * k + math.log2(gamma)
    )


def digit_band(m: int, q_prime: int, h: int) -> tuple[int, int]:
    """Range of an i-th digit sum produced by ``m`` constructed summands."""
    return m * (h - 1) * q_prime + m, m * h * q_prime - m


def digit_multiplicity(x: int, q_prime: int, h: int) -> int:
    """Number of summands with a non-zero digit, read off the digit sum ``x``."""
    if x == 0:
        return 0
    for m in range(1, h + 1):
        lo, hi = digit_band(m, q_prime, h)
        if lo <= x <= hi:
            return m
    raise NotInAnyBand(f"digit {x} is not in any band for q'={q_prime}, h={h}")
