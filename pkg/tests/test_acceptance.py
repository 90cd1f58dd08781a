"""One test per acceptance criterion; conftest prints a PASS/FAIL line for each."""

from fractions import Fraction
from pathlib import Path

import pytest

from uegs.bench import run_bench
from uegs.curves import brute_force_count
from uegs.gauss import SigmaSpec, discrete_log_table, sigma_series
from uegs.modforms import TorsionLabel, eisenstein_e4, eisenstein_e6, tate_xy
from uegs.modpoly import build_canonical_modpoly, required_precision, residual
from uegs.pipeline import (
    WorkingContext,
    default_index_moduli,
    gauss_sum_at,
    primes_between,
    search_instances,
    trace_mod_ell,
)
from uegs.representation import (
    RepresentationPlan,
    SeriesContext,
    build_representation,
    rebuild_a0_slice,
    stage_a,
    verify_identity,
)
from uegs.store import dumps_modpoly, modpoly_hash, packaged_data_dir

README = Path(__file__).resolve().parents[1] / "README.md"
SIGMA_PAIRS = [(5, 2), (5, 4), (7, 3), (13, 4)]
PRIMES = primes_between(5, 500)


def reps_for(shipped, ell):
    return {n: shipped[(ell, n)] for n in default_index_moduli(ell)}


def check_indices(result, t, ell):
    ind = discrete_log_table(ell)[t % ell]
    for idx in result.indices:
        assert idx.e == ind % idx.n, f"index mod {idx.n}: pipeline {idx.e}, brute force {ind % idx.n}"
    assert result.t_mod_ell == t % ell


def test_criterion_1_tate_equation():
    prec = 41
    e4, e6 = eisenstein_e4(prec), eisenstein_e6(prec)
    labels = TorsionLabel.all(5)
    assert len(labels) == 24
    for label in labels:
        x, y = tate_xy(label, prec)
        res = y * y - (x * x * x - e4 * x / 48 + e6 / 864)
        assert res.is_zero() and res.prec > 40, label


def test_criterion_2_modular_polynomials(modpolys):
    for ell in (5, 7, 13):
        poly = build_canonical_modpoly(ell)
        assert dumps_modpoly(poly) == dumps_modpoly(modpolys[ell])
        assert poly.is_integral
        assert (poly.degree_x, poly.degree_y) == (ell + 1, poly.v)
        assert residual(poly, required_precision(ell) + 10).is_zero()
        assert build_canonical_modpoly(ell, required_precision(ell) + 20) == poly


def test_criterion_3_sigma_properties():
    prec = 12
    for ell, n in SIGMA_PAIRS:
        spec = SigmaSpec(ell, n)
        sig = sigma_series(spec, 0, prec)
        assert sigma_series(spec, 0, prec, scale_p=2, scale_q=3) == sig
        if spec.vanishes:
            assert sig.is_zero()
            continue
        assert sig.m == n
        assert sig.to_subfield(n) == sig
        assert sig.order() >= -1 + Fraction(1, ell)


def test_criterion_4_representation_correctness(modpolys):
    margin = 16
    for ell, n in SIGMA_PAIRS:
        poly = modpolys[ell]
        plan = RepresentationPlan(ell, n, margin=margin)
        assert plan.prec_target == (ell * ell + ell + 1) * plan.v - 1
        rep = build_representation(plan, poly, modpoly_hash(poly))
        for k in (0, 1):
            verify_identity(rep, poly, margin, conjugate=k)
        if rep.is_zero:
            continue
        ctx = SeriesContext.build(plan, poly, plan.window + 2 * plan.v + 4)
        for ai in stage_a(ctx.sigma, ctx.m2, ctx.quot, ell):
            assert ai.is_zero() or ai.order() >= -plan.v
        bound = (ell * ell + ell) * plan.v - 1
        assert all(i2 >= 0 and i2 * plan.v + ell * i3 <= bound for _, i2, i3 in rep.tensor)
        assert rebuild_a0_slice(rep, poly) == rep.slice(0)


@pytest.fixture(scope="module")
def primary_runs(modpolys, shipped_reps):
    """Search-found Atkin instances with r > 2 and p = 1 mod each n, with their pipeline results."""
    runs = []
    for ell in (5, 13):
        big = 1
        for n in default_index_moduli(ell):
            big = big * n
        hits = search_instances(ell, modpolys[ell], want=3, primes=PRIMES,
                                accept=lambda h, big=big: h.r > 2 and h.inst.p % big == 1)
        for hit in hits:
            res = trace_mod_ell(hit.inst, ell, reps_for(shipped_reps, ell), modpolys[ell])
            runs.append((ell, hit, res))
    return runs


@pytest.fixture(scope="module")
def general_runs(modpolys, shipped_reps):
    hits = search_instances(5, modpolys[5], want=3, primes=PRIMES, accept=lambda h: h.r > 2 and h.inst.p % 4 != 1)
    return [(5, hit, trace_mod_ell(hit.inst, 5, reps_for(shipped_reps, 5), modpolys[5])) for hit in hits]


def test_criterion_5_end_to_end_trace(primary_runs, modpolys):
    for ell in (5, 13):
        assert sum(1 for e, _, _ in primary_runs if e == ell) >= 3
    for ell, hit, res in primary_runs:
        assert all(idx.path == "primary" for idx in res.indices)
        check_indices(res, hit.t, ell)
    # calibration of xi = zeta_ell^eps: both signs give the same indices, so +1 is kept
    poly = modpolys[5]
    flipped = build_representation(RepresentationPlan(5, 4, eps=-1), poly, modpoly_hash(poly))
    for ell, hit, res in primary_runs:
        if ell == 5:
            again = trace_mod_ell(hit.inst, 5, {4: flipped}, poly)
            assert again.to_json() == res.to_json()


def test_criterion_6_r_two_shortcut(modpolys, shipped_reps):
    for ell in (5, 13):
        hits = search_instances(ell, modpolys[ell], want=3, primes=PRIMES, accept=lambda h: h.r == 2)
        assert len(hits) >= 3
        for hit in hits:
            res = trace_mod_ell(hit.inst, ell, reps_for(shipped_reps, ell), modpolys[ell])
            assert res.r == 2 and res.t_mod_ell == 0
            assert brute_force_count(hit.inst.p, hit.inst.a, hit.inst.b)[1] % ell == 0


def test_criterion_7_general_prime_path(general_runs):
    assert len(general_runs) >= 1
    for ell, hit, res in general_runs:
        assert [idx.path for idx in res.indices] == ["general"]
        check_indices(res, hit.t, ell)


def test_criterion_8_oracle_invariants(primary_runs, general_runs, modpolys):
    for ell, hit, res in primary_runs + general_runs:
        ctx = WorkingContext(hit.inst, ell, modpolys[ell], res.field_degree)
        curve, p, t = ctx.curve, hit.inst.p, hit.t
        gen = ctx.match_kernel(ctx.isogeny_roots()[0])
        for n in default_index_moduli(ell):
            gamma = gauss_sum_at(ctx, gen, n) ** n
            for a in (2, 3, ell - 1):
                assert gauss_sum_at(ctx, curve.mul(a, gen), n) ** n == gamma
            lhs = gauss_sum_at(ctx, curve.frobenius(gen), n, p)
            assert lhs == gauss_sum_at(ctx, gen, n) ** p
        base = curve.weil_pairing(gen, curve.frobenius(gen), ell)
        assert curve.weil_pairing(gen, curve.frobenius(gen, 2), ell) == base ** (t % ell)
        for P in curve.torsion_points(ell):
            assert curve.add(curve.frobenius(P, 2), curve.mul(p, P)) == curve.mul(t, curve.frobenius(P))


def test_criterion_9_cost_model():
    text = README.read_text()
    assert "not competitive" in text
    report = run_bench((5, 7, 13), packaged_data_dir())
    assert report.ratio_in_band, f"count(13)/count(5) relative to the cubic model is {report.ratio_13_5:.3f}"
    counts = {r.ell: r.count for r in report.records}
    assert 2.2 <= report.exponent <= 3.8, (
        f"fitted exponent {report.exponent:.3f} from counts {counts} is below the cubic band [2.2, 3.8]; "
        "the stored tensors have O(ell^2 v) entries, see the decisions ledger"
    )
