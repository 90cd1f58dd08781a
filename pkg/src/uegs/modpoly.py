"""The canonical modular polynomial M_ell(X, Y) attached to m_ell.

M_ell(X, j) = (X - m_ell) * prod_k (X - m_ell2 twisted by k).  The elementary
symmetric functions of the roots come from power sums via Newton's identities,
and each one is then rewritten as a polynomial in j by peeling off leading
terms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .modforms import EtaQuotientSpec, j_invariant, m_ell, m_ell2
from .qseries import QSeries, ZeroSeriesError

log = logging.getLogger(__name__)


class ModpolyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BivariatePolynomial:
    """Sparse sum of c * X^i * Y^k, terms kept sorted by (i desc, k desc)."""

    terms: tuple[tuple[int, int, object], ...]

    @classmethod
    def from_dict(cls, coeffs: dict) -> "BivariatePolynomial":
        items = sorted(((i, k, c) for (i, k), c in coeffs.items() if c), key=lambda t: (-t[0], -t[1]))
        return cls(tuple(items))

    def as_dict(self) -> dict:
        return {(i, k): c for i, k, c in self.terms}

    def coefficient(self, i: int, k: int):
        return self.as_dict().get((i, k), 0)

    @property
    def degree_x(self) -> int:
        return max((i for i, _, _ in self.terms), default=-1)

    @property
    def degree_y(self) -> int:
        return max((k for _, k, _ in self.terms), default=-1)

    def partial_x(self) -> "BivariatePolynomial":
        return BivariatePolynomial.from_dict({(i - 1, k): c * i for i, k, c in self.terms if i})

    def partial_y(self) -> "BivariatePolynomial":
        return BivariatePolynomial.from_dict({(i, k - 1): c * k for i, k, c in self.terms if k})

    def coefficients_in_x(self, y, one=1, convert: Callable = lambda c: c) -> list:
        """[f_0, ..., f_deg] with f_i = sum_k c_ik y^k, by Horner in y."""
        rows: dict[int, list] = {}
        for i, k, c in self.terms:
            rows.setdefault(i, []).append((k, c))
        out = []
        for i in range(self.degree_x + 1):
            acc = None
            row = dict(rows.get(i, []))
            top = max(row, default=-1)
            for k in range(top, -1, -1):
                c = row.get(k, 0)
                acc = (acc * y if acc is not None else None)
                if c:
                    term = convert(c)
                    acc = term if acc is None else acc + term
            out.append(acc if acc is not None else 0 * one)
        return out

    def evaluate(self, x, y, one=1, convert: Callable = lambda c: c):
        """Horner in X over Horner in Y; works for any commutative ring elements."""
        coeffs = self.coefficients_in_x(y, one, convert)
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * x + c
        return acc


@dataclass(frozen=True)
class ModularPolynomial(BivariatePolynomial):
    ell: int = 0
    v: int = 0

    def __post_init__(self):
        d = self.as_dict()
        if d.get((self.ell + 1, 0)) != 1 or self.degree_x != self.ell + 1:
            raise ModpolyError(f"M_{self.ell} must be monic of degree {self.ell + 1} in X")
        if self.degree_y != self.v:
            raise ModpolyError(f"M_{self.ell} must have degree {self.v} in Y, found {self.degree_y}")
        if any((i, k) != (self.ell + 1, 0) and i == self.ell + 1 for i, k, _ in self.terms):
            raise ModpolyError("leading X coefficient must be the constant 1")

    @property
    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for _, _, c in self.terms)

    def partials(self) -> tuple[BivariatePolynomial, BivariatePolynomial]:
        return self.partial_x(), self.partial_y()


def newton_elementary(power_sums: Sequence, one) -> list:
    """e_0..e_n from power sums p_1..p_n."""
    e = [one]
    for k in range(1, len(power_sums) + 1):
        acc = None
        for i in range(1, k + 1):
            term = e[k - i] * power_sums[i - 1]
            if i % 2 == 0:
                term = -term
            acc = term if acc is None else acc + term
        e.append(acc / k)
    return e


def peel_in_j(series: QSeries, j: QSeries) -> dict[int, Fraction]:
    """Write a q-series with pole of finite order as a polynomial in j."""
    out: dict[int, Fraction] = {}
    rest = series
    jpow = {0: QSeries.constant(1), 1: j}
    while True:
        try:
            o = rest.valuation()
        except ZeroSeriesError:
            break
        if o > 0:
            raise ModpolyError(f"residual of positive order {o} left over; precision too low?")
        c = rest.leading_coefficient().to_subfield(1).rational_value()
        k = -o
        if k not in jpow:
            jpow[k] = j ** k
        out[k] = c
        rest = rest - jpow[k] * c
    return out


def required_precision(ell: int) -> int:
    v = EtaQuotientSpec.for_ell(ell).v
    return (v + 1) * (ell + 1) + ell + 4


def build_canonical_modpoly(ell: int, prec: int | None = None) -> ModularPolynomial:
    spec = EtaQuotientSpec.for_ell(ell)
    need = required_precision(ell)
    prec = need if prec is None else prec
    if prec < need:
        raise ModpolyError(f"precision {prec} below the minimum {need} for ell={ell}")
    work = prec + 2 * (ell + 1) * spec.v
    m = m_ell(ell, work)
    g = m_ell2(ell, work)
    j = j_invariant(work)
    sums = []
    mp, gp = QSeries.constant(1), QSeries.constant(1)
    for _ in range(ell + 1):
        mp, gp = mp * m, gp * g
        sums.append(mp + gp.trace())
    elem = newton_elementary(sums, QSeries.constant(1))
    coeffs: dict[tuple[int, int], object] = {(ell + 1, 0): 1}
    for k in range(1, ell + 2):
        ek = elem[k] if k % 2 == 0 else -elem[k]
        if ek.prec is not None and ek.prec < prec:
            raise ModpolyError(f"coefficient of X^{ell + 1 - k} known only to q^{ek.prec}")
        for deg, c in peel_in_j(ek.truncate(prec), j).items():
            if c:
                coeffs[(ell + 1 - k, deg)] = int(c) if c.denominator == 1 else c
    poly = ModularPolynomial(BivariatePolynomial.from_dict(coeffs).terms, ell=ell, v=spec.v)
    if not poly.is_integral:
        log.warning("M_%d has non-integral coefficients; keeping rationals", ell)
    return poly


def residual(poly: ModularPolynomial, prec: int) -> QSeries:
    """M_ell(m_ell, j) at a fresh precision; zero when the polynomial is right."""
    return poly.evaluate(m_ell(poly.ell, prec), j_invariant(prec))


def conjugate_residual(poly: ModularPolynomial, prec: int) -> QSeries:
    return poly.evaluate(m_ell2(poly.ell, prec), j_invariant(prec))


@lru_cache(maxsize=None)
def canonical_modpoly(ell: int) -> ModularPolynomial:
    """Memoised build at the minimum precision, checked 10 powers of q further."""
    poly = build_canonical_modpoly(ell)
    prec = required_precision(ell) + 10
    if not residual(poly, prec).is_zero():
        raise ModpolyError(f"M_{ell}(m_ell, j) does not vanish to q^{prec}")
    return poly
