from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from treesos.concentration import (WeightedFunction, _at_least_sq, concentration_bound, concentration_dichotomy,
                                   low_set_weak)
from treesos.errors import PreconditionError

fractions = st.fractions(min_value=0, max_value=50, max_denominator=8)


def _dec(q):
    return Decimal(q.numerator) / Decimal(q.denominator)


def test_strong_second_alternative_can_fail():
    # three-point measure where only the weak form survives
    wf = WeightedFunction([Fraction(39, 10), Fraction(1, 2), Fraction(5, 4)],
                          [Fraction(6, 100), Fraction(51, 100), Fraction(43, 100)])
    d = concentration_dichotomy(wf, 1, Fraction(1, 16))
    assert (d.case_i, d.case_ii, d.case_ii_weak) == (False, False, True)
    assert d.verdict == "case-ii-weak"
    assert d.mid_mass == Fraction(49, 100) and d.weak_mass == Fraction(1)


def test_hypotheses_are_enforced():
    wf = WeightedFunction([1, 2, 3])
    with pytest.raises(PreconditionError):
        concentration_dichotomy(wf, 3, Fraction(1, 4))
    with pytest.raises(PreconditionError):
        concentration_dichotomy(wf, Fraction(1, 10), Fraction(1, 4))
    with pytest.raises(PreconditionError):
        WeightedFunction([1, -1])
    with pytest.raises(PreconditionError):
        WeightedFunction([1, 1], [Fraction(1, 3), Fraction(1, 3)])
    with pytest.raises(PreconditionError):
        concentration_bound([1, 5], 1, Fraction(1, 4))


@settings(max_examples=300, deadline=None)
@given(st.fractions(min_value=0, max_value=2, max_denominator=1000),
       st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000), max_denominator=1000))
def test_at_least_sq_matches_decimal(q, eps):
    getcontext().prec = 60
    rhs = (1 - _dec(eps).sqrt().sqrt()) ** 2
    lhs = _dec(q)
    assume(abs(lhs - rhs) > Decimal(10) ** -40)
    assert _at_least_sq(q, eps) == (lhs >= rhs)


@settings(max_examples=300, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=20), st.integers(2, 400), st.integers(1, 100))
def test_one_alternative_always_holds(values, inv_eps, pct):
    wf = WeightedFunction(values)
    eps = Fraction(1, inv_eps)
    t = wf.expectation * Fraction(pct, 100)
    assume(t > 0 and eps * wf.sup ** 2 < t * t)
    d = concentration_dichotomy(wf, t, eps)
    assert d.case_i or d.case_ii_weak
    low = low_set_weak(values, t, eps)
    assert d.weak_mass == 1 - Fraction(len(low), len(values))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(900, 1000), min_size=1, max_size=40), st.integers(3, 200))
def test_bound_holds_near_the_mean(raw, inv_eps):
    eps = Fraction(1, inv_eps)
    t = Fraction(min(raw) + sum(raw) // len(raw), 2)
    assume(max(raw) <= (1 + eps) * t and t <= Fraction(sum(raw), len(raw)))
    out = concentration_bound(raw, t, eps)
    getcontext().prec = 60
    keep = 1 - _dec(eps).sqrt()
    expected = [i for i, v in enumerate(raw) if Decimal(v) >= keep * _dec(t)]
    assert out == expected
    assert len(out) >= keep * len(raw)
