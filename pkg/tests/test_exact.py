from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from treesos.exact import Surd, ceil_frac, floor_frac, frac, grow, iroot_floor, root_ceil, root_floor, shrink


def test_frac_rejects_floats():
    with pytest.raises(TypeError):
        frac(0.1)
    assert frac("1/25") == Fraction(1, 25)
    assert frac(3) == 3


@given(st.integers(0, 10**30), st.sampled_from([1, 2, 4, 8]))
def test_iroot_floor_brackets(m, n):
    r = iroot_floor(m, n)
    assert r**n <= m < (r + 1) ** n


@given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**4), st.sampled_from([2, 4, 8]))
def test_root_floor_and_ceil(x, n):
    f, c = root_floor(x, n), root_ceil(x, n)
    assert Fraction(f) ** n <= x < Fraction(f + 1) ** n
    assert c - f in (0, 1) and Fraction(c) ** n >= x


def test_root_index_must_be_power_of_two():
    with pytest.raises(ValueError):
        root_floor(5, 3)


def test_surd_comparisons_both_ways():
    s = Surd(0, 5, Fraction(1, 25))  # 5 * (1/5) = 1
    assert s == s
    assert s >= 1 and s <= 1 and not s > 1
    assert 1 <= s and Fraction(99, 100) < s
    q = Surd(1, -1, Fraction(1, 16), 4)  # 1 - 1/2
    assert q >= Fraction(1, 2) and q <= Fraction(1, 2)


@given(st.fractions(min_value=-50, max_value=50, max_denominator=50),
       st.fractions(min_value=-9, max_value=9, max_denominator=9),
       st.fractions(min_value=0, max_value=50, max_denominator=50),
       st.sampled_from([2, 4]))
def test_surd_floor_matches_sign(a, c, x, n):
    s = Surd(a, c, x, n)
    f = s.floor()
    assert s >= f and s < f + 1
    assert s.ceil() - f in (0, 1)


def test_shrink_and_grow():
    assert shrink(100, 1, Fraction(1, 4)) == Surd(100, -100, Fraction(1, 4))
    assert shrink(100, 1, Fraction(1, 4)) >= 50 and shrink(100, 1, Fraction(1, 4)) <= 50
    assert grow(10, 2, Fraction(1, 16), 4) >= 20


def test_floor_ceil_frac():
    assert floor_frac(Fraction(-1, 2)) == -1 and ceil_frac(Fraction(-1, 2)) == 0
    assert ceil_frac(Fraction(7, 7)) == 1
