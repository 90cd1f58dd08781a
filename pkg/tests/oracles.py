"""Slow, independent reference computations used only by the tests."""

from __future__ import annotations

import cmath
from fractions import Fraction

from flint import fmpq, fmpq_mat

from uegs.cyclotomic import CycRat
from uegs.qseries import QSeries


# power series as {exponent: Fraction} dictionaries, classical products


def series_mul(a: dict, b: dict, prec) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if e < prec:
                out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def euler_product(count: int) -> dict:
    """prod_{k>=1} (1 - q^k) through q^(count-1), one factor at a time."""
    acc = {0: Fraction(1)}
    for k in range(1, count):
        acc = series_mul(acc, {0: Fraction(1), k: Fraction(-1)}, count)
    return acc


def delta_by_product(count: int) -> dict:
    """q prod (1 - q^k)^24 through q^(count-1)."""
    eta = euler_product(count)
    acc = {1: Fraction(1)}
    for _ in range(24):
        acc = series_mul(acc, eta, count)
    return acc


def divisor_sum(n: int, k: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def rational_dict(f: QSeries) -> dict:
    return {e: c.rational_value() for e, c in f.items()}


# cyclotomic numbers as complex numbers


def complex_value(c: CycRat) -> complex:
    z = cmath.exp(2j * cmath.pi / c.m)
    return sum(complex(float(x)) * z**i for i, x in enumerate(c.c))


def gauss_sum_complex(ell: int, n: int, power: int, g: int, c: int = 1, eps: int = 1) -> complex:
    """sum_l chi^-power(l) exp(2 pi i eps l c / ell), chi(g^e) = exp(2 pi i e / n)."""
    ind, x = {}, 1
    for e in range(ell - 1):
        ind[x] = e
        x = x * g % ell
    total = 0j
    for lam in range(1, ell):
        chi_inv = cmath.exp(-2j * cmath.pi * power * ind[lam] / n)
        total += chi_inv * cmath.exp(2j * cmath.pi * eps * lam * c / ell)
    return total


# stage A by a dense linear system


def stage_a_by_linear_solve(lhs: QSeries, m2: QSeries, ell: int, v: int, top: int) -> list[dict]:
    """Solve sum_i a_i m2^i = lhs for a_i = sum_{e=-v}^{top} alpha_{i,e} q^e.

    Only the coefficients q^(E/ell) with E < (top+1) ell - (ell-1) v are used,
    so unknowns beyond ``top`` cannot contribute; the system is square.
    Returns, per i, {e: CycRat} over the conductor of ``lhs``.
    """
    d = ell
    powers, acc = [], QSeries.constant(1)
    for _ in range(ell):
        powers.append(acc)
        acc = acc * m2
    lo_eq = -v * ell - (ell - 1) * v
    hi_eq = (top + 1) * ell - (ell - 1) * v
    unknowns = [(i, e) for i in range(ell) for e in range(-v, top + 1)]
    rows = []
    for big_e in range(lo_eq, hi_eq):
        row = []
        for i, e in unknowns:
            k = Fraction(big_e - e * d, d)
            try:
                c = powers[i].coefficient(k) if k >= powers[i].order() else 0
            except ValueError:
                raise AssertionError("m2 powers not known far enough") from None
            row.append(Fraction(c.rational_value()) if c else Fraction(0))
        rows.append(row)
    size = len(unknowns)
    assert len(rows) == size
    mat = fmpq_mat(size, size, [fmpq(x.numerator, x.denominator) for row in rows for x in row])
    m = lhs.m
    phi = len(lhs.leading_coefficient().c) if not lhs.is_zero() else 1
    rhs_cols = []
    for big_e in range(lo_eq, hi_eq):
        c = lhs.coefficient(Fraction(big_e, d)) if not lhs.is_zero() else None
        coords = list(c.c) if c is not None else [0] * phi
        rhs_cols.append(coords + [0] * (phi - len(coords)))
    solutions = []
    for t in range(phi):
        b = fmpq_mat(size, 1, [fmpq(Fraction(r[t]).numerator, Fraction(r[t]).denominator) for r in rhs_cols])
        solutions.append(mat.solve(b))
    out = [dict() for _ in range(ell)]
    for idx, (i, e) in enumerate(unknowns):
        coords = []
        for t in range(phi):
            q = solutions[t][idx, 0]
            coords.append(Fraction(int(q.p), int(q.q)))
        val = CycRat(m, coords)
        if not val.is_zero():
            out[i][e] = val
    return out


# elliptic curves by enumerating every pair


def count_points_by_pairs(p: int, a: int, b: int) -> int:
    return 1 + sum(1 for x in range(p) for y in range(p) if (y * y - x**3 - a * x - b) % p == 0)
