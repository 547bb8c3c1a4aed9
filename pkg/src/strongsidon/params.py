"""Strong-B_h parameters and the exact ``gap < gamma * top**alpha`` test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Optional

# alpha = p/q is compared exactly through gap**q vs top**p; larger q fall back to floats
MAX_EXACT_DENOMINATOR = 12
JSON_SAFE_INT = 2 ** 53


def as_fraction(x: Real, max_den: Optional[int] = None) -> Optional[Fraction]:
    """Exact rational value of ``x`` if it has one worth using, else None.

    A float becomes the simplest fraction with denominator at most 1000 that
    rounds to it (``1/3`` stays ``1/3``), else the value of its shortest repr.
    """
    if isinstance(x, (int, Fraction)):
        fr = Fraction(x)
    else:
        xf = float(x)
        if not math.isfinite(xf):
            return None
        fr = Fraction(xf).limit_denominator(1000)
        if float(fr) != xf:
            fr = Fraction(repr(xf))
    if max_den is not None and fr.denominator > max_den:
        return None
    return fr


def jint(x: int):
    """Integers beyond 2**53 go to JSON as decimal strings."""
    x = int(x)
    return str(x) if abs(x) > JSON_SAFE_INT else x


class Threshold:
    """Predicate ``gap < gamma * top**alpha`` for integer ``gap`` and ``top``."""

    def __init__(self, alpha: Real, gamma: Real = 1):
        self.alpha = alpha
        self.gamma = gamma
        a = as_fraction(alpha, MAX_EXACT_DENOMINATOR)
        g = as_fraction(gamma)
        self.exact = a is not None and g is not None and a >= 0 and g > 0
        if self.exact:
            self._p, self._q = a.numerator, a.denominator
            self._gn, self._gd = g.numerator, g.denominator
            self._gq = self._gn ** self._q

    def value(self, top: int) -> float:
        return float(self.gamma) * float(top) ** float(self.alpha)

    def below(self, gap: int, top: int) -> bool:
        if gap < 0:
            gap = -gap
        if self.exact:
            # (gap * gd)**q < gn**q * top**p
            return (gap * self._gd) ** self._q < self._gq * top ** self._p
        return gap < self.value(top)

    def max_below(self, top: int) -> int:
        """Largest integer strictly below ``gamma * top**alpha``."""
        w = max(0, math.ceil(self.value(top)) - 1)
        while self.below(w + 1, top):
            w += 1
        while w > 0 and not self.below(w, top):
            w -= 1
        return w


@dataclass(frozen=True)
class StrongParams:
    h: int = 2
    alpha: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 2:
            raise ValueError(f"h must be an integer >= 2, got {self.h}")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    @property
    def threshold(self) -> Threshold:
        return Threshold(self.alpha, self.gamma)

    def to_json(self) -> dict:
        return {"h": self.h, "alpha": float(self.alpha), "gamma": float(self.gamma)}
