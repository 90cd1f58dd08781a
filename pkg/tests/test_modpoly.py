import pytest

from uegs.finite_fields import FiniteField
from uegs.modforms import EtaQuotientSpec, j_invariant, m_ell, m_ell2_conjugate
from uegs.modpoly import (
    BivariatePolynomial,
    ModpolyError,
    ModularPolynomial,
    build_canonical_modpoly,
    conjugate_residual,
    required_precision,
    residual,
)

ELLS = [5, 7, 13]


def test_m5_closed_form(modpolys):
    # (X^2 + 10 X + 5)^3 - X Y
    from itertools import product

    quad = {0: 5, 1: 10, 2: 1}
    cube: dict = {}
    for (i, a), (k, b), (l, c) in product(quad.items(), repeat=3):
        cube[(i + k + l, 0)] = cube.get((i + k + l, 0), 0) + a * b * c
    cube[(1, 1)] = -1
    assert modpolys[5].as_dict() == {key: c for key, c in cube.items() if c}


@pytest.mark.parametrize("ell", ELLS)
def test_shape_and_integrality(modpolys, ell):
    poly = modpolys[ell]
    v = EtaQuotientSpec.for_ell(ell).v
    assert poly.degree_x == ell + 1
    assert poly.degree_y == v
    assert poly.coefficient(ell + 1, 0) == 1
    assert poly.is_integral


@pytest.mark.parametrize("ell", ELLS)
def test_residual_vanishes_beyond_build_precision(modpolys, ell):
    prec = required_precision(ell) + 10
    res = residual(modpolys[ell], prec)
    assert res.is_zero()
    assert res.prec >= prec - 1 - ell


@pytest.mark.parametrize("ell", ELLS)
def test_every_conjugate_is_a_root(modpolys, ell):
    prec = 12
    poly, j = modpolys[ell], j_invariant(prec + 2)
    for k in (0, 1, ell - 1):
        assert poly.evaluate(m_ell2_conjugate(ell, k, prec + 2), j).truncate(prec - ell).is_zero()
    assert conjugate_residual(poly, prec).is_zero()


@pytest.mark.parametrize("ell", ELLS)
def test_stable_under_rebuild_at_higher_precision(modpolys, ell):
    assert build_canonical_modpoly(ell, required_precision(ell) + 20) == modpolys[ell]


def test_precision_shortfall_is_reported():
    with pytest.raises(ModpolyError):
        build_canonical_modpoly(7, 5)


@pytest.mark.parametrize("ell", ELLS)
def test_term_order_bound(modpolys, ell):
    v = EtaQuotientSpec.for_ell(ell).v
    for i, k, _ in modpolys[ell].terms:
        assert i * v <= (v - k) * ell + v


def test_partial_derivatives():
    f = BivariatePolynomial.from_dict({(2, 1): 1})
    assert f.partial_x().as_dict() == {(1, 1): 2}
    assert f.partial_y().as_dict() == {(2, 0): 1}


def test_partials_of_m5(modpolys):
    px, py = modpolys[5].partials()
    assert py.degree_y == 0
    assert py.as_dict() == {(1, 0): -1}
    assert px.degree_x == 5


@pytest.mark.parametrize("ell", ELLS)
def test_y_partial_at_series_has_positive_order(modpolys, ell):
    prec = 15
    val = modpolys[ell].partial_y().evaluate(m_ell(ell, prec), j_invariant(prec))
    assert val.order() >= 1


def test_specialize_over_prime_field_at_zero(modpolys):
    field = FiniteField(101, 1)
    poly = modpolys[7]
    j = field(17)
    expected = sum((field(c) * j**k for i, k, c in poly.terms if i == 0), field.zero)
    assert poly.evaluate(field.zero, j, one=field.one, convert=field) == expected


def test_constructor_rejects_non_monic():
    with pytest.raises(ModpolyError):
        ModularPolynomial(((6, 0, 2), (1, 1, -1)), ell=5, v=1)
