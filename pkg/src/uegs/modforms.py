"""q-expansions of the classical forms, the eta-quotient m_ell and its
conjugates, and Tate-curve coordinates of ell-torsion points.

Every constructor takes an absolute precision ``prec`` in powers of q and
returns a series known exactly below ``q^prec``.  Results are memoised per
``(function, ell, prec)``; series are immutable so sharing them is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from flint import fmpz_poly

from .cyclotomic import CycRat, power_table
from .qseries import QSeries


def divisor_power_sums(count: int, k: int) -> list[int]:
    """sigma_k(N) for 0 <= N < count (with sigma_k(0) = 0)."""
    out = [0] * count
    for d in range(1, count):
        dk = d**k
        for n in range(d, count, d):
            out[n] += dk
    return out


@lru_cache(maxsize=None)
def eta_tilde(prec: int) -> QSeries:
    """prod_{n>=1} (1 - q^n), from Euler's pentagonal theorem."""
    coeffs = [0] * prec
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= prec:
            break
        coeffs[e1] += sign
        if k and e2 < prec:
            coeffs[e2] += sign
        k += 1
    return QSeries.from_ints(coeffs, prec=prec)


@lru_cache(maxsize=None)
def eisenstein_e4(prec: int) -> QSeries:
    s3 = divisor_power_sums(prec, 3)
    return QSeries.from_ints([1] + [240 * x for x in s3[1:]], prec=prec)


@lru_cache(maxsize=None)
def eisenstein_e6(prec: int) -> QSeries:
    s5 = divisor_power_sums(prec, 5)
    return QSeries.from_ints([1] + [-504 * x for x in s5[1:]], prec=prec)


@lru_cache(maxsize=None)
def delta(prec: int) -> QSeries:
    return (eta_tilde(max(prec - 1, 1)) ** 24).shift(1).truncate(prec)


@lru_cache(maxsize=None)
def j_invariant(prec: int) -> QSeries:
    j = eisenstein_e4(prec + 1) ** 3 / delta(prec + 2)
    return j.truncate(prec)


def standard_series(name: str, prec: int) -> QSeries:
    table = {"eta": eta_tilde, "delta": delta, "E4": eisenstein_e4, "E6": eisenstein_e6, "j": j_invariant}
    return table[name](prec)


@dataclass(frozen=True)
class EtaQuotientSpec:
    """Exponents of m_ell = ell^s q^v (eta~(q^ell)/eta~(q))^(2s)."""

    ell: int
    s: int
    v: int

    @classmethod
    def for_ell(cls, ell: int) -> "EtaQuotientSpec":
        if ell < 3 or any(ell % p == 0 for p in range(2, int(ell**0.5) + 1)):
            raise ValueError(f"ell must be an odd prime, got {ell}")
        s = 12 // gcd(12, ell - 1)
        return cls(ell, s, (ell - 1) // gcd(ell - 1, 12))


@lru_cache(maxsize=None)
def m_ell(ell: int, prec: int) -> QSeries:
    spec = EtaQuotientSpec.for_ell(ell)
    rel = prec - spec.v
    if rel <= 0:
        return QSeries.zero(prec=prec)
    top = eta_tilde(-(-rel // ell)).substitute_power(ell).truncate(rel)
    ratio = (top * eta_tilde(rel).inverse()) ** (2 * spec.s)
    return (ratio * ell**spec.s).shift(spec.v).truncate(prec)


@lru_cache(maxsize=None)
def m_ell2(ell: int, prec: int) -> QSeries:
    """Conjugate ell^s / m_ell(q^(1/ell)); integer coefficients, series in q^(1/ell)."""
    spec = EtaQuotientSpec.for_ell(ell)
    base = m_ell(ell, prec * ell + 2 * spec.v).substitute_root(ell)
    return (base.inverse() * ell**spec.s).truncate(prec)


def m_ell2_conjugate(ell: int, k: int, prec: int) -> QSeries:
    return m_ell2(ell, prec).twist(k)


@dataclass(frozen=True)
class TorsionLabel:
    """The point zeta^a q^(b/ell) of the Tate curve, 0 <= a, b < ell, not both zero."""

    a: int
    b: int
    ell: int

    def __post_init__(self):
        if not (0 <= self.a < self.ell and 0 <= self.b < self.ell) or (self.a, self.b) == (0, 0):
            raise ValueError(f"invalid torsion label ({self.a}, {self.b}) for ell={self.ell}")

    @classmethod
    def reduce(cls, a: int, b: int, ell: int) -> "TorsionLabel":
        return cls(a % ell, b % ell, ell)

    @classmethod
    def all(cls, ell: int) -> list["TorsionLabel"]:
        return [cls(a, b, ell) for b in range(ell) for a in range(ell) if (a, b) != (0, 0)]


def _from_zeta_buckets(buckets: list[list[int]], ell: int, d: int, prec_num: int, den: int) -> QSeries:
    """sum_s zeta_ell^s * buckets[s], buckets being integer coefficient lists."""
    if all(not any(b) for b in buckets[1:]):
        return QSeries([fmpz_poly(buckets[0])], d=d, prec=prec_num, den=den)
    table = power_table(ell)
    phi = ell - 1
    layers = [fmpz_poly() for _ in range(phi)]
    for s, coeffs in enumerate(buckets):
        if not any(coeffs):
            continue
        p = fmpz_poly(coeffs)
        for t, c in enumerate(table[s]):
            if c:
                layers[t] += p * c
    return QSeries(layers, d=d, m=ell, prec=prec_num, den=den)


@lru_cache(maxsize=None)
def tate_xy(label: TorsionLabel, prec: int) -> tuple[QSeries, QSeries]:
    """Weierstrass coordinates (x, y) of the labelled point.

    The curve is y^2 = x^3 - E4/48 x + E6/864.
    """
    a, b, ell = label.a, label.b, label.ell
    d = ell if b else 1
    top = prec * d
    sigma1 = divisor_power_sums(prec, 1)
    # everything scaled by 12 (x) or 2 (y) to stay integral
    xb = [[0] * top for _ in range(ell)]
    yb = [[0] * top for _ in range(ell)]
    xb[0][0] += 1
    for n in range(1, prec):
        xb[0][n * d] -= 24 * sigma1[n]
    if b == 0:
        # w = zeta^a: closed forms for the n = 0 terms
        for k in range(1, prec):
            s_plus, s_minus = (a * k) % ell, (-a * k) % ell
            for e in range(k, prec, k):
                xb[s_plus][e] += 12 * k
                xb[s_minus][e] += 12 * k
                yb[s_plus][e] += k * k
                yb[s_minus][e] -= k * k
        w = CycRat.zeta(ell, a)
        x0 = w / (1 - w) ** 2
        y0 = w * (1 + w) / (1 - w) ** 3 / 2
        x = _from_zeta_buckets(xb, ell, d, top, 12) + x0
        y = _from_zeta_buckets(yb, ell, d, top, 2) + y0
        return x.truncate(prec), y.truncate(prec)
    for k in range(1, top):
        s_plus, s_minus = (a * k) % ell, (-a * k) % ell
        e = k * b
        while e < top:
            xb[s_plus][e] += 12 * k
            yb[s_plus][e] += k * k
            e += k * ell
        e = k * (ell - b)
        while e < top:
            xb[s_minus][e] += 12 * k
            yb[s_minus][e] -= k * k
            e += k * ell
    return _from_zeta_buckets(xb, ell, d, top, 12), _from_zeta_buckets(yb, ell, d, top, 2)


@lru_cache(maxsize=None)
def p1_series(ell: int, prec: int) -> QSeries:
    """Sum of x over the nonzero points of the subgroup generated by zeta."""
    total = QSeries.zero(prec=prec)
    for a in range(1, ell):
        total = total + tate_xy(TorsionLabel(a, 0, ell), prec)[0]
    return total.to_subfield(1)


def p1_closed_form(ell: int, prec: int) -> QSeries:
    """Independent expression of p1 through divisor sums."""
    s1 = divisor_power_sums(prec, 1)
    coeffs = [Fraction(-(ell * ell - ell), 12)]
    for n in range(1, prec):
        inner = s1[n] - (ell * s1[n // ell] if n % ell == 0 else 0)
        coeffs.append(Fraction(-2 * ell * inner))
    return QSeries.from_dict(dict(enumerate(coeffs)), prec=prec)


def fricke_images(ell: int, prec: int) -> dict[str, QSeries]:
    """Images of m_ell, m_ell2 and j under tau -> -1/(ell tau)."""
    spec = EtaQuotientSpec.for_ell(ell)
    return {
        "m_ell": (m_ell(ell, prec + 2 * spec.v).inverse() * ell**spec.s).truncate(prec),
        "m_ell2": m_ell(ell, -(-prec // ell) + 1).substitute_power(ell).truncate(prec),
        "j": j_invariant(-(-prec // ell) + 2).substitute_power(ell).truncate(prec),
    }
