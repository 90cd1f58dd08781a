from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import complex_value
from uegs.cyclotomic import (
    ConductorError,
    CycRat,
    SubfieldError,
    cyclotomic_polynomial,
    euler_phi,
    rat_from_str,
    rat_to_str,
    units_mod,
)

CONDUCTORS = [1, 3, 4, 5, 7, 12, 20]

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@st.composite
def cycrats(draw, m=None):
    m = draw(st.sampled_from(CONDUCTORS)) if m is None else m
    return CycRat(m, draw(st.lists(fractions, min_size=euler_phi(m), max_size=euler_phi(m))))


@st.composite
def same_field(draw, k=3):
    m = draw(st.sampled_from(CONDUCTORS))
    return [draw(cycrats(m)) for _ in range(k)]


@given(same_field())
def test_ring_axioms(xs):
    a, b, c = xs
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    assert a * 1 == a


@given(cycrats())
def test_inverse(a):
    if a.is_zero():
        with pytest.raises(ZeroDivisionError):
            a.inverse()
    else:
        assert a * a.inverse() == 1
        assert (a / a) == 1


@given(same_field(2), st.integers(min_value=1, max_value=59))
def test_galois_is_a_field_automorphism(xs, c):
    a, b = xs
    m = a.m
    c = [u for u in units_mod(m)][c % len(units_mod(m))]
    assert (a + b).galois(c) == a.galois(c) + b.galois(c)
    assert (a * b).galois(c) == a.galois(c) * b.galois(c)


@given(cycrats())
def test_json_and_string_round_trip(a):
    assert CycRat.from_json(a.to_json()) == a
    assert isinstance(str(a), str)


@given(cycrats(), st.sampled_from([2, 3, 5]))
def test_embedding_preserves_value_and_hash(a, k):
    big = a.embed(a.m * k)
    assert big == a
    assert hash(big) == hash(a)
    assert abs(complex_value(big) - complex_value(a)) < 1e-6


def test_zeta_has_order_m_and_minimal_polynomial():
    for m in (3, 5, 12):
        z = CycRat.zeta(m)
        assert z**m == 1
        assert all(z**k != 1 for k in range(1, m))
        value = sum((z**i * c for i, c in enumerate(cyclotomic_polynomial(m))), CycRat.rational(0))
        assert value == 0


def test_orbit_sum_descends_to_rationals():
    z = CycRat.zeta(5)
    total = sum((z**a / (1 - z**a) ** 2 for a in range(1, 5)), CycRat.rational(0))
    assert total.to_subfield(1).rational_value() == Fraction(-2)


def test_descent_failure_names_the_automorphism():
    with pytest.raises(SubfieldError):
        CycRat.zeta(5).to_subfield(1)


def test_subfield_of_zeta_20():
    i = CycRat.zeta(20, 5)
    assert i * i == -1
    assert i.to_subfield(4) == CycRat.zeta(4)


def test_quadratic_irrationality_in_zeta_5():
    z = CycRat.zeta(5)
    root5 = 1 + 2 * (z + z**4)
    assert root5 * root5 == 5
    assert root5.to_subfield(5) == root5


def test_rational_strings():
    assert rat_to_str(Fraction(-3, 4)) == "-3/4"
    assert rat_from_str("6/8") == Fraction(3, 4)
    with pytest.raises(ValueError):
        rat_from_str("3")


def test_bad_conductor_raises():
    with pytest.raises((ConductorError, ValueError)):
        CycRat(5, [1, 2])


def test_mixed_conductor_arithmetic():
    a, b = CycRat.zeta(3), CycRat.zeta(4)
    c = a * b
    assert c.m == 12
    assert c == CycRat.zeta(12, 7)
