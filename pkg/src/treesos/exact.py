"""Exact arithmetic for thresholds involving square, fourth and eighth roots.

Every decision predicate in the package is evaluated without floating point.
Thresholds of the form ``a + c * x**(1/n)`` with rational ``a, c, x`` and
``n`` a power of two are represented by :class:`Surd`; comparing a surd with a
rational reduces to comparing integer powers, so the verdict is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from numbers import Rational

Number = int | Fraction


def frac(x) -> Fraction:
    """Coerce ints, Fractions and rational strings like ``"1/25"`` to Fraction.

    Floats are rejected so that no binary rounding sneaks into a threshold.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


def _check_root_index(n: int) -> None:
    if n < 1 or n & (n - 1):
        raise ValueError(f"root index must be a power of two, got {n}")


def iroot_floor(m: int, n: int) -> int:
    """floor(m ** (1/n)) for a non-negative integer m and n a power of two."""
    if m < 0:
        raise ValueError("negative radicand")
    _check_root_index(n)
    while n > 1:
        m = isqrt(m)
        n //= 2
    return m


def root_floor(x, n: int = 2) -> int:
    """floor(x ** (1/n)) for a non-negative rational x."""
    x = frac(x)
    if x < 0:
        raise ValueError("negative radicand")
    p, q = x.numerator, x.denominator
    # x^(1/n) = (p q^(n-1))^(1/n) / q and floor(y/q) = floor(floor(y)/q)
    return iroot_floor(p * q ** (n - 1), n) // q


def root_ceil(x, n: int = 2) -> int:
    f = root_floor(x, n)
    return f if Fraction(f) ** n == frac(x) else f + 1


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Surd:
    """The real number ``a + c * x**(1/n)``."""

    a: Fraction
    c: Fraction
    x: Fraction
    n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "a", frac(self.a))
        object.__setattr__(self, "c", frac(self.c))
        object.__setattr__(self, "x", frac(self.x))
        if self.x < 0:
            raise ValueError("negative radicand")
        _check_root_index(self.n)

    def sign_minus(self, q) -> int:
        """Sign of ``self - q`` computed exactly."""
        p = self.a - frac(q)
        c, x, n = self.c, self.x, self.n
        if c == 0 or x == 0:
            return _sign(p)
        if p >= 0 and c > 0:
            return 1
        if p <= 0 and c < 0:
            return -1
        if p > 0:  # c < 0: compare p with |c| r
            return _sign(p ** n - (-c) ** n * x)
        # p < 0 < c: compare c r with |p|
        return _sign(c ** n * x - (-p) ** n)

    def __lt__(self, q):
        return self.sign_minus(q) < 0

    def __le__(self, q):
        return self.sign_minus(q) <= 0

    def __gt__(self, q):
        return self.sign_minus(q) > 0

    def __ge__(self, q):
        return self.sign_minus(q) >= 0

    def floor(self) -> int:
        c, x, n = self.c, self.x, self.n
        if c >= 0:
            guess = int(self.a // 1) + root_floor(c ** n * x, n)
        else:
            guess = int(self.a // 1) - root_ceil((-c) ** n * x, n)
        while self.sign_minus(guess + 1) >= 0:
            guess += 1
        while self.sign_minus(guess) < 0:
            guess -= 1
        return guess

    def ceil(self) -> int:
        f = self.floor()
        return f if self.sign_minus(f) == 0 else f + 1

    def scaled(self, s) -> "Surd":
        s = frac(s)
        return Surd(self.a * s, self.c * s, self.x, self.n)

    def __str__(self):
        root = "sqrt" if self.n == 2 else f"root{self.n}"
        return f"{self.a} + {self.c}*{root}({self.x})"

    def approx(self) -> float:
        """Float value for human-readable reports only."""
        return float(self.a) + float(self.c) * float(self.x) ** (1.0 / self.n)


def lin_root(const, coef, radicand, n: int = 2) -> Surd:
    """Shorthand for ``const + coef * radicand**(1/n)``."""
    return Surd(const, coef, radicand, n)


def shrink(base, coef, radicand, n: int = 2) -> Surd:
    """``(1 - coef * radicand**(1/n)) * base``, the usual '(1 - c sqrt(eps)) k' shape."""
    base = frac(base)
    return Surd(base, -frac(coef) * base, radicand, n)


def grow(base, coef, radicand, n: int = 2) -> Surd:
    """``(1 + coef * radicand**(1/n)) * base``."""
    base = frac(base)
    return Surd(base, frac(coef) * base, radicand, n)


def root_times(coef, radicand, n: int = 2) -> Surd:
    """``coef * radicand**(1/n)``."""
    return Surd(0, coef, radicand, n)


def ceil_frac(x) -> int:
    x = frac(x)
    return -((-x.numerator) // x.denominator)


def floor_frac(x) -> int:
    x = frac(x)
    return x.numerator // x.denominator
