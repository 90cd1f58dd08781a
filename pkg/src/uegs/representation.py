"""Rational representation of sigma in terms of j, m_ell and a second root.

The precomputation runs in two stages.

Stage A divides M_ell(X, j) by (X - m_ell) to get f(X) = sum f_k X^k, then
obtains the series a_i of the "Lagrange form"

    sigma * f'(m2) = sum_i a_i m2^i,

as traces a_i = sum_k f_k * Tr(sigma * m2^(k-i-1)) over the conjugates of m2.

Stage B rewrites every a_i * M_Y(m_ell, j) as a polynomial in m_ell and j by
greedily cancelling leading terms against monomials u^i2 j^i3, u = m_ell/ell^s.
The result is the tensor b[i1, i2, i3] with

    sigma = sum b m2^i1 m^i2 j^i3 / (N(m2) * M_Y(m, j)),  N = M_X(X, j)/(X - m).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .cyclotomic import CycRat
from .gauss import SigmaSpec, smallest_primitive_root
from .modforms import EtaQuotientSpec, j_invariant, m_ell, m_ell2
from .modpoly import ModularPolynomial
from .qseries import QSeries, ZeroSeriesError

log = logging.getLogger(__name__)


class RepresentationError(ArithmeticError):
    """Precision exhausted, a bound violated, or a verification mismatch."""


@dataclass(frozen=True)
class RepresentationPlan:
    ell: int
    n: int
    eps: int = 1
    margin: int = 16

    @property
    def eta(self) -> EtaQuotientSpec:
        return EtaQuotientSpec.for_ell(self.ell)

    @property
    def v(self) -> int:
        return self.eta.v

    @property
    def prec_target(self) -> int:
        """Number of coefficients (from order 1 - v) that pin down the tensor."""
        ell, v = self.ell, self.v
        return (ell * ell + ell + 1) * v - 1

    @property
    def max_order(self) -> int:
        return (self.ell * self.ell + self.ell) * self.v - 1

    @property
    def window(self) -> int:
        """Absolute q-precision to which a_i * M_Y is reduced and checked."""
        return 1 - self.v + self.prec_target + self.margin

    @property
    def index_bound(self) -> int:
        return self.max_order

    @property
    def sigma_spec(self) -> SigmaSpec:
        return SigmaSpec(self.ell, self.n, self.eps)


@dataclass
class RationalRepresentation:
    ell: int
    n: int
    g: int
    xi: int
    v: int
    prec: int
    modpoly_hash: str
    tensor: dict[tuple[int, int, int], CycRat] = field(default_factory=dict)

    def slice(self, i1: int) -> dict[tuple[int, int], CycRat]:
        return {(i2, i3): c for (a, i2, i3), c in self.tensor.items() if a == i1}

    @property
    def is_zero(self) -> bool:
        return not self.tensor


def quotient_coefficients(fx: list[QSeries], root: QSeries) -> tuple[list[QSeries], QSeries]:
    """Synthetic division of sum fx[i] X^i by (X - root): quotient list, remainder."""
    deg = len(fx) - 1
    quot = [None] * deg
    quot[deg - 1] = fx[deg]
    for k in range(deg - 1, 0, -1):
        quot[k - 1] = fx[k] + root * quot[k]
    rem = fx[0] + root * quot[0]
    return quot, rem


def _as_series(x) -> QSeries:
    return x if isinstance(x, QSeries) else QSeries.constant(x)


def stage_a(sigma: QSeries, m2: QSeries, quot: list[QSeries], ell: int, count: int | None = None) -> list[QSeries]:
    """a_i = sum_{k>i} f_k Tr(sigma m2^(k-i-1)), i = 0 .. count-1."""
    count = ell if count is None else count
    traces = []
    power = QSeries.constant(1)
    for i in range(ell):
        traces.append((sigma * power).trace())
        power = power * m2
    out = []
    for i in range(count):
        acc = None
        for k in range(i + 1, ell + 1):
            term = _as_series(quot[k]) * traces[k - i - 1]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


class MonomialCache:
    """u^i2 * j^i3 with u = m_ell / ell^s, all with leading coefficient 1."""

    def __init__(self, u: QSeries, j: QSeries):
        self.u_pows = [QSeries.constant(1), u]
        self.j_pows = [QSeries.constant(1), j]
        self.cache: dict[tuple[int, int], QSeries] = {}

    def __call__(self, i2: int, i3: int) -> QSeries:
        key = (i2, i3)
        if key not in self.cache:
            while len(self.u_pows) <= i2:
                self.u_pows.append(self.u_pows[-1] * self.u_pows[1])
            while len(self.j_pows) <= i3:
                self.j_pows.append(self.j_pows[-1] * self.j_pows[1])
            self.cache[key] = self.u_pows[i2] if i3 == 0 else self.u_pows[i2] * self.j_pows[i3]
        return self.cache[key]


def stage_b(h: QSeries, monomials: MonomialCache, ell: int, v: int, s: int, window: int,
            bound: int) -> dict[tuple[int, int], CycRat]:
    """Greedy reduction of h (integral exponents) to sum b m^i2 j^i3.

    ``window`` is the absolute precision to which h must cancel; any monomial
    outside i2*v + ell*i3 <= bound is an error.
    """
    if h.prec is not None and h.prec < window:
        raise RepresentationError(f"stage B input known to q^{h.prec}, need q^{window}")
    rest = h.truncate(window)
    out: dict[tuple[int, int], CycRat] = {}
    while True:
        try:
            o = rest.valuation()
        except ZeroSeriesError:
            break
        if o < 1 - v:
            raise RepresentationError(f"stage B input has order {o} below {1 - v}")
        i2 = -(-o // v)
        i3 = i2 * v - o
        if i2 * v + ell * i3 > bound:
            raise RepresentationError(
                f"monomial m^{i2} j^{i3} breaks the bound {bound}; precision too low or sigma wrong"
            )
        c = rest.leading_coefficient()
        rest = rest - monomials(i2, i3) * c
        out[(i2, i3)] = c / Fraction(ell) ** (s * i2)
    return out


@dataclass
class SeriesContext:
    """The q-expansions shared by both stages and the verifier."""

    plan: RepresentationPlan
    prec: int
    m: QSeries
    m2: QSeries
    j: QSeries
    sigma: QSeries
    fx: list[QSeries]
    quot: list[QSeries]
    my: QSeries

    @classmethod
    def build(cls, plan: RepresentationPlan, modpoly: ModularPolynomial, prec: int) -> "SeriesContext":
        from .gauss import sigma_series

        m = m_ell(plan.ell, prec)
        m2 = m2_ = m_ell2(plan.ell, prec)
        j = j_invariant(prec)
        sigma = sigma_series(plan.sigma_spec, 0, prec)
        fx = [_as_series(c) for c in modpoly.coefficients_in_x(j)]
        quot, rem = quotient_coefficients(fx, m)
        if not rem.is_zero():
            raise RepresentationError("M_ell(X, j) is not divisible by X - m_ell")
        my = _as_series(modpoly.partial_y().evaluate(m, j))
        return cls(plan, prec, m, m2_, j, sigma, fx, quot, my)


def build_representation(plan: RepresentationPlan, modpoly: ModularPolynomial, modpoly_hash: str,
                         timings: dict | None = None) -> RationalRepresentation:
    """Run both stages and return the verified-by-construction tensor."""
    ell, v, s = plan.ell, plan.v, plan.eta.s
    rep = RationalRepresentation(ell, plan.n, smallest_primitive_root(ell), plan.eps, v, plan.prec_target, modpoly_hash)
    timings = {} if timings is None else timings
    if plan.sigma_spec.vanishes:
        log.info("sigma vanishes identically for (ell, n) = (%d, %d)", ell, plan.n)
        return rep
    slack = 2 * v + 4
    while True:
        t0 = time.perf_counter()
        ctx = SeriesContext.build(plan, modpoly, plan.window + slack)
        t1 = time.perf_counter()
        a = stage_a(ctx.sigma, ctx.m2, ctx.quot, ell)
        t2 = time.perf_counter()
        hs = [ai * ctx.my for ai in a]
        if all(h.prec is None or h.prec >= plan.window for h in hs):
            break
        slack += 4
        log.info("precision short for stage B, retrying with slack %d", slack)
    monomials = MonomialCache(ctx.m / Fraction(ell) ** s, ctx.j)
    for i1, h in enumerate(hs):
        for (i2, i3), c in stage_b(h, monomials, ell, v, s, plan.window, plan.index_bound).items():
            rep.tensor[(i1, i2, i3)] = c
    t3 = time.perf_counter()
    timings.update(series=t1 - t0, stage_a=t2 - t1, stage_b=t3 - t2)
    return rep


# evaluation


class MulCounter:
    def __init__(self):
        self.count = 0


def _horner(coeffs: list, x, zero, counter: MulCounter | None):
    """coeffs[0] + coeffs[1] x + ... ; every multiplication is counted."""
    acc = None
    for c in reversed(coeffs):
        if acc is None:
            acc = c
            continue
        acc = acc * x
        if counter is not None:
            counter.count += 1
        acc = acc + c
    return zero if acc is None else acc


def specialize_tensor(rep: RationalRepresentation, convert: Callable[[CycRat], object], zero):
    """Dense nested lists [i1][i2][i3] of converted coefficients."""
    top2 = max((i2 for _, i2, _ in rep.tensor), default=0)
    nested = [[[zero] * rep.v for _ in range(top2 + 1)] for _ in range(rep.ell)]
    for (i1, i2, i3), c in rep.tensor.items():
        nested[i1][i2][i3] = convert(c)
    return nested


def evaluate_numerator(nested, j, m, m2, zero, counter: MulCounter | None = None):
    """sum b m2^i1 m^i2 j^i3 by nested dense Horner (j innermost)."""
    outer = []
    for rows in nested:
        inner = [_horner(cols, j, zero, counter) for cols in rows]
        outer.append(_horner(inner, m, zero, counter))
    return _horner(outer, m2, zero, counter)


def evaluate_denominator(modpoly: ModularPolynomial, j, m, m2, zero, one, convert, counter: MulCounter | None = None):
    """N(m2) * M_Y(m, j) with N = f'(m2), f = M_ell(X, j)/(X - m)."""
    fx = _coeffs_in_x(modpoly, j, zero, convert, counter)
    quot = [None] * (len(fx) - 1)
    quot[-1] = fx[-1]
    for k in range(len(fx) - 2, 0, -1):
        quot[k - 1] = fx[k] + m * quot[k]
        if counter is not None:
            counter.count += 1
    deriv = [quot[k] * k for k in range(1, len(quot))]
    n_val = _horner(deriv, m2, zero, counter)
    my = _horner(_coeffs_in_x(modpoly.partial_y(), j, zero, convert, counter), m, zero, counter)
    if counter is not None:
        counter.count += 1
    return n_val * my


def _coeffs_in_x(poly, j, zero, convert, counter):
    rows: dict[int, dict[int, object]] = {}
    for i, k, c in poly.terms:
        rows.setdefault(i, {})[k] = c
    out = []
    for i in range(poly.degree_x + 1):
        row = rows.get(i, {})
        top = max(row, default=-1)
        coeffs = [convert(row.get(k, 0)) for k in range(top + 1)]
        out.append(_horner(coeffs, j, zero, counter))
    return out


def evaluate(rep: RationalRepresentation, modpoly: ModularPolynomial, j, m, m2, *, convert: Callable,
             zero, one, counter: MulCounter | None = None, nested=None):
    """R(j, m, m2) in any commutative ring, given a coefficient map ``convert``."""
    if nested is None:
        nested = specialize_tensor(rep, convert, zero)
    num = evaluate_numerator(nested, j, m, m2, zero, counter)
    den = evaluate_denominator(modpoly, j, m, m2, zero, one, convert, counter)
    if counter is not None:
        counter.count += 1
    return num / den


# verification


def _numerator_series(rep: RationalRepresentation, m2: QSeries, m: QSeries, j: QSeries) -> QSeries:
    zero = QSeries.zero()
    nested = specialize_tensor(rep, lambda c: c, 0)
    return evaluate_numerator(nested, j, m, m2, zero)


def verify_identity(rep: RationalRepresentation, modpoly: ModularPolynomial, margin: int = 16,
                    conjugate: int = 0) -> None:
    """Check sigma(k) * N(m2_k) * M_Y == numerator(m2_k) through the plan window.

    ``conjugate`` = k selects the twisted root m2_k and sigma(k) computed
    directly from its torsion labels.  Raises RepresentationError on mismatch.
    """
    from .gauss import sigma_series

    plan = RepresentationPlan(rep.ell, rep.n, rep.xi, margin)
    if plan.sigma_spec.vanishes:
        if rep.tensor:
            raise RepresentationError("sigma vanishes but the tensor is nonzero")
        return
    prec = plan.window + 2 * rep.v + 4
    m, j = m_ell(rep.ell, prec), j_invariant(prec)
    m2 = m_ell2(rep.ell, prec)
    sigma = sigma_series(plan.sigma_spec, 0, prec)
    if conjugate % rep.ell:
        m2 = m2.twist(conjugate)
        sigma = sigma_series(plan.sigma_spec, conjugate, prec)
    fx = [_as_series(c) for c in modpoly.coefficients_in_x(j)]
    quot, _ = quotient_coefficients(fx, m)
    deriv = QSeries.zero()
    for k in range(len(quot) - 1, 0, -1):
        deriv = deriv * m2 + quot[k] * k
    my = _as_series(modpoly.partial_y().evaluate(m, j))
    lhs = sigma * deriv * my
    rhs = _numerator_series(rep, m2, m, j)
    diff = lhs - rhs
    reach = diff.prec
    if reach is not None and reach < plan.window:
        raise RepresentationError(f"verification only reached q^{reach}, wanted q^{plan.window}")
    if not diff.truncate(plan.window).is_zero():
        raise RepresentationError(f"identity fails at q^{diff.truncate(plan.window).order()}")


def rebuild_a0_slice(rep: RationalRepresentation, modpoly: ModularPolynomial) -> dict[tuple[int, int], CycRat]:
    """Recompute the i1 = 0 slice from a_0 alone at the reduced precision (2 ell + 1) v - 1."""
    ell, v = rep.ell, rep.v
    plan = RepresentationPlan(rep.ell, rep.n, rep.xi)
    window = 2 * ell * v
    ctx = SeriesContext.build(plan, modpoly, window + 2 * v + 6)
    a0 = stage_a(ctx.sigma, ctx.m2, ctx.quot, ell, count=1)[0]
    monomials = MonomialCache(ctx.m / Fraction(ell) ** plan.eta.s, ctx.j)
    return stage_b(a0 * ctx.my, monomials, ell, v, plan.eta.s, window, 2 * v * ell - 1)
