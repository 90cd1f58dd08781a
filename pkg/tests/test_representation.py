import random
from fractions import Fraction

import pytest

from oracles import stage_a_by_linear_solve
from uegs.cyclotomic import CycRat
from uegs.gauss import SigmaSpec, sigma_series
from uegs.modforms import EtaQuotientSpec, fricke_images, j_invariant, m_ell, m_ell2, p1_series, delta
from uegs.pipeline import aux_representation
from uegs.qseries import QSeries
from uegs.representation import (
    MonomialCache,
    RationalRepresentation,
    RepresentationError,
    RepresentationPlan,
    SeriesContext,
    build_representation,
    evaluate,
    quotient_coefficients,
    rebuild_a0_slice,
    stage_a,
    stage_b,
    verify_identity,
)
from uegs.store import dumps_representation, modpoly_hash

SMALL = [(5, 2), (5, 4), (7, 3)]


def derivative_at(quot, m2):
    acc = QSeries.zero()
    for k in range(len(quot) - 1, 0, -1):
        acc = acc * m2 + quot[k] * k
    return acc


def test_plan_precisions():
    assert RepresentationPlan(5, 4).prec_target == 30
    assert RepresentationPlan(13, 3).prec_target == 182
    assert RepresentationPlan(7, 3).prec_target == 56
    plan = RepresentationPlan(5, 4, margin=16)
    assert plan.window == 1 - plan.v + 30 + 16
    assert plan.index_bound == 29


@pytest.fixture(scope="module")
def contexts(modpolys):
    out = {}
    for ell, n in SMALL:
        plan = RepresentationPlan(ell, n)
        ctx = SeriesContext.build(plan, modpolys[ell], 24)
        out[(ell, n)] = (plan, ctx, stage_a(ctx.sigma, ctx.m2, ctx.quot, ell))
    return out


def test_division_by_x_minus_m_is_exact(modpolys):
    prec = 20
    j, m = j_invariant(prec), m_ell(7, prec)
    fx = [c if isinstance(c, QSeries) else QSeries.constant(c) for c in modpolys[7].coefficients_in_x(j)]
    _, rem = quotient_coefficients(fx, m)
    assert rem.is_zero()


@pytest.mark.parametrize("pair", SMALL)
def test_stage_a_reproduces_sigma_times_derivative(contexts, pair):
    plan, ctx, a = contexts[pair]
    lhs = ctx.sigma * derivative_at(ctx.quot, ctx.m2)
    rhs = QSeries.zero()
    for ai in reversed(a):
        rhs = rhs * ctx.m2 + ai
    assert (lhs - rhs).is_zero()
    assert min(lhs.prec, rhs.prec) > 15


@pytest.mark.parametrize("pair", SMALL)
def test_stage_a_series_have_integer_exponents_and_bounded_order(contexts, pair):
    plan, _, a = contexts[pair]
    for ai in a:
        assert ai.d == 1
        assert ai.m in (1, plan.n) or ai.is_zero()
        if not ai.is_zero():
            assert ai.order() >= -plan.v


@pytest.mark.parametrize("pair", SMALL)
def test_stage_a_agrees_with_linear_solve(contexts, pair):
    plan, ctx, a = contexts[pair]
    ell, top = plan.ell, 8
    lhs = ctx.sigma * derivative_at(ctx.quot, ctx.m2)
    solved = stage_a_by_linear_solve(lhs, m_ell2(ell, 24), ell, plan.v, top)
    for i in range(ell):
        for e in range(-plan.v, top + 1):
            assert a[i].coefficient(e) == solved[i].get(e, 0)


def test_stage_b_of_one_is_the_y_derivative(modpolys):
    ell, prec = 5, 20
    eta = EtaQuotientSpec.for_ell(ell)
    m, j = m_ell(ell, prec), j_invariant(prec)
    my = modpolys[ell].partial_y().evaluate(m, j)
    out = stage_b(my, MonomialCache(m / Fraction(ell) ** eta.s, j), ell, eta.v, eta.s, 15, 29)
    assert out == {(i, k): CycRat.rational(c) for (i, k), c in modpolys[ell].partial_y().as_dict().items()}


def test_stage_b_rejects_low_order_input(modpolys):
    prec = 20
    m, j = m_ell(5, prec), j_invariant(prec)
    with pytest.raises(RepresentationError):
        stage_b(j * j, MonomialCache(m / 125, j), 5, 1, 3, 15, 29)


def test_stage_b_rejects_monomials_past_the_bound(modpolys):
    prec = 20
    m, j = m_ell(5, prec), j_invariant(prec)
    with pytest.raises(RepresentationError):
        stage_b(m**3, MonomialCache(m / 125, j), 5, 1, 3, 15, 2)


@pytest.mark.parametrize("ell", [5, 7])
def test_auxiliary_function_reproduces_its_series(modpolys, ell):
    coeffs = aux_representation(ell, "p1^6/Delta", modpolys[ell])
    prec = 40
    m, j = m_ell(ell, prec), j_invariant(prec)
    num = QSeries.zero()
    for (i2, i3), c in coeffs.items():
        num = num + m**i2 * j**i3 * c
    target = p1_series(ell, prec) ** 6 / delta(prec + 2)
    my = modpolys[ell].partial_y().evaluate(m, j)
    assert (num - target * my).truncate(prec - 4).is_zero()
    assert (target * my).order() >= 0


@pytest.mark.parametrize("pair", [(5, 2), (5, 4), (7, 2), (7, 3), (13, 3), (13, 4)])
def test_shipped_tensors_respect_index_bounds(shipped_reps, pair):
    rep = shipped_reps[pair]
    bound = (rep.ell**2 + rep.ell) * rep.v - 1
    for (i1, i2, i3), c in rep.tensor.items():
        assert 0 <= i1 < rep.ell and i2 >= 0 and 0 <= i3 < rep.v
        assert i2 * rep.v + rep.ell * i3 <= bound
        assert c.m == rep.n


@pytest.mark.parametrize("pair", [(5, 4), (7, 3), (13, 4)])
def test_shipped_representations_verify(modpolys, shipped_reps, pair):
    verify_identity(shipped_reps[pair], modpolys[pair[0]], 16)


@pytest.mark.parametrize("pair", [(5, 4), (7, 3), (7, 2)])
def test_conjugate_identity(modpolys, shipped_reps, pair):
    verify_identity(shipped_reps[pair], modpolys[pair[0]], 16, conjugate=1)


@pytest.mark.parametrize("pair", [(5, 4), (7, 3), (13, 3)])
def test_rebuild_a0_slice_matches(modpolys, shipped_reps, pair):
    rep = shipped_reps[pair]
    assert rebuild_a0_slice(rep, modpolys[rep.ell]) == rep.slice(0)


@pytest.mark.parametrize("pair", [(5, 4), (7, 3)])
def test_rebuild_is_byte_identical_to_shipped(modpolys, shipped_reps, pair):
    ell, n = pair
    poly = modpolys[ell]
    rep = build_representation(RepresentationPlan(ell, n), poly, modpoly_hash(poly))
    again = build_representation(RepresentationPlan(ell, n), poly, modpoly_hash(poly))
    assert dumps_representation(rep) == dumps_representation(again) == dumps_representation(shipped_reps[pair])


def test_zero_tensor_for_vanishing_sigma(modpolys, shipped_reps):
    rep = shipped_reps[(5, 2)]
    assert rep.is_zero
    verify_identity(rep, modpolys[5], 16)
    bad = RationalRepresentation(5, 2, 2, 1, 1, 30, rep.modpoly_hash, {(0, 0, 0): CycRat.rational(1)})
    with pytest.raises(RepresentationError):
        verify_identity(bad, modpolys[5], 16)


@pytest.mark.parametrize("seed", range(5))
def test_perturbing_one_entry_breaks_verification(modpolys, shipped_reps, seed):
    rep = shipped_reps[(5, 4)]
    key = random.Random(seed).choice(sorted(rep.tensor))
    tensor = dict(rep.tensor)
    tensor[key] = tensor[key] + CycRat.zeta(4) ** seed
    bad = RationalRepresentation(rep.ell, rep.n, rep.g, rep.xi, rep.v, rep.prec, rep.modpoly_hash, tensor)
    with pytest.raises(RepresentationError):
        verify_identity(bad, modpolys[5], 16)


@pytest.mark.parametrize("k", [0, 1])
def test_evaluation_at_series_reproduces_sigma(modpolys, shipped_reps, k):
    rep, poly = shipped_reps[(5, 4)], modpolys[5]
    prec = 50
    j, m, m2 = j_invariant(prec), m_ell(5, prec), m_ell2(5, prec).twist(k)
    val = evaluate(rep, poly, j, m, m2, convert=lambda c: c, zero=QSeries.zero(), one=1)
    sigma = sigma_series(SigmaSpec(5, 4), k, 30)
    assert val.agrees_with(sigma)
    assert min(val.prec, sigma.prec) >= 25


@pytest.mark.parametrize("ell", [5, 7, 13])
def test_fricke_orders_used_by_the_precision_bound(modpolys, ell):
    v = EtaQuotientSpec.for_ell(ell).v
    images = fricke_images(ell, 40)
    assert images["m_ell2"].order() == v * ell
    my = modpolys[ell].partial_y().evaluate(images["m_ell"], images["j"])
    assert my.order() >= -(v - 1) * ell - v
