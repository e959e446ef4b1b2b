"""Two concentration facts for non-negative functions on a finite set.

Every comparison is exact.  Thresholds with roots of eps are kept as
:class:`~treesos.exact.Surd` values; the one threshold of the form
(1 - eps^(1/4))^2 t is decided by squaring twice (see ``_at_least_sq``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ContractViolation, PreconditionError
from .exact import Surd, frac, grow, root_times, shrink


@dataclass(frozen=True)
class WeightedFunction:
    """f over range(N) together with a probability measure (uniform if omitted)."""

    values: tuple
    measure: tuple | None = None

    def __post_init__(self):
        vals = tuple(frac(v) for v in self.values)
        if not vals:
            raise PreconditionError("the domain is non-empty")
        if any(v < 0 for v in vals):
            raise PreconditionError("f is non-negative")
        object.__setattr__(self, "values", vals)
        if self.measure is not None:
            mu = tuple(frac(m) for m in self.measure)
            if len(mu) != len(vals):
                raise PreconditionError("measure and values have the same length", len(mu), len(vals))
            if any(m < 0 for m in mu) or sum(mu) != 1:
                raise PreconditionError("measure is a probability vector", sum(mu), 1)
            object.__setattr__(self, "measure", mu)

    @property
    def N(self) -> int:
        return len(self.values)

    def mu(self, i: int) -> Fraction:
        return Fraction(1, self.N) if self.measure is None else self.measure[i]

    def mass(self, pred) -> Fraction:
        return sum((self.mu(i) for i, v in enumerate(self.values) if pred(v)), Fraction(0))

    @property
    def expectation(self) -> Fraction:
        return sum((self.mu(i) * v for i, v in enumerate(self.values)), Fraction(0))

    @property
    def sup(self) -> Fraction:
        return max(self.values)


def _at_least_sq(q: Fraction, eps: Fraction) -> bool:
    """q >= (1 - eps^(1/4))^2 for 0 < eps < 1 and q >= 0.

    With b = sqrt(q) < 1 this is eps^(1/4) >= 1 - b, i.e. eps >= (1 - b)^4,
    i.e. 4 (1 + q) sqrt(q) >= (1 + q)^2 + 4q - eps.
    """
    if q >= 1:
        return True
    lhs = root_times(4 * (1 + q), q)
    return lhs >= (1 + q) ** 2 + 4 * q - eps


@dataclass
class Dichotomy:
    case_i: bool
    case_ii: bool
    case_ii_weak: bool
    high_mass: Fraction
    mid_mass: Fraction
    weak_mass: Fraction

    @property
    def verdict(self) -> str:
        if self.case_i and self.case_ii:
            return "both"
        if self.case_i:
            return "case-i"
        if self.case_ii:
            return "case-ii"
        return "case-ii-weak"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "case_i": self.case_i, "case_ii": self.case_ii,
                "case_ii_weak": self.case_ii_weak, "high_mass": str(self.high_mass),
                "mid_mass": str(self.mid_mass), "weak_mass": str(self.weak_mass)}


def concentration_dichotomy(wf: WeightedFunction, t, eps) -> Dichotomy:
    """Decide which alternative holds for f, t, eps with sqrt(eps) |f|_inf < t <= E f.

    (i)  mu(f > (1 + sqrt eps) t) >= eps
    (ii) mu(f > (1 - eps^(1/4)) t) >= 1 - eps^(1/4)
    weak (ii): mu(f >= (1 - eps^(1/4))^2 t) >= 1 - eps^(1/4)

    One of (i) and weak (ii) always holds; (ii) itself can fail, so it is
    only reported.
    """
    t, eps = frac(t), frac(eps)
    if not 0 < eps < 1:
        raise PreconditionError("0 < eps < 1", eps)
    if not root_times(wf.sup, eps) < t:
        raise PreconditionError("sqrt(eps) |f|_inf < t", root_times(wf.sup, eps), t)
    if not t <= wf.expectation:
        raise PreconditionError("t <= E f", t, wf.expectation)
    hi = grow(t, 1, eps)
    mid = shrink(t, 1, eps, 4)
    need = Surd(1, -1, eps, 4)
    high_mass = wf.mass(lambda v: v > hi)
    mid_mass = wf.mass(lambda v: v > mid)
    weak_mass = wf.mass(lambda v: _at_least_sq(v / t, eps))
    out = Dichotomy(high_mass >= eps, mid_mass >= need, weak_mass >= need, high_mass, mid_mass, weak_mass)
    if not (out.case_i or out.case_ii_weak):
        raise ContractViolation("neither alternative holds")
    return out


def low_set_weak(values: Sequence, t, eps) -> list[int]:
    """Indices with f(n) < (1 - eps^(1/4))^2 t."""
    t, eps = frac(t), frac(eps)
    return [i for i, v in enumerate(values) if not _at_least_sq(frac(v) / t, eps)]


def concentration_bound(values: Sequence, t, eps) -> list[int]:
    """Indices n with f(n) >= (1 - sqrt eps) t, for t <= mean f,
    |f|_inf <= (1 + eps) t and 0 < eps < 1/2; there are at least
    (1 - sqrt eps) N of them."""
    vals = [frac(v) for v in values]
    t, eps = frac(t), frac(eps)
    if not vals:
        raise PreconditionError("the domain is non-empty")
    if not 0 < eps < Fraction(1, 2):
        raise PreconditionError("0 < eps < 1/2", eps)
    if not 0 < t <= Fraction(sum(vals), len(vals)):
        raise PreconditionError("0 < t <= mean f", t, Fraction(sum(vals), len(vals)))
    if max(vals) > (1 + eps) * t:
        raise PreconditionError("|f|_inf <= (1 + eps) t", max(vals), (1 + eps) * t)
    thr = shrink(t, 1, eps)
    out = [i for i, v in enumerate(vals) if v >= thr]
    if not len(out) >= shrink(len(vals), 1, eps):
        raise ContractViolation("fewer than (1 - sqrt eps) N indices above (1 - sqrt eps) t")
    return out
