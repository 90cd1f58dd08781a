"""Characters of (Z/ell)^*, cyclotomic Gauss sums and the series sigma.

sigma(k) = G * H(k) * p1^r * gauss / Delta, where G sums chi(l) V(l * zeta)
over the torsion points in the direction of zeta, H(k) does the same along
zeta^k q^(1/ell), and gauss is the cyclotomic Gauss sum of chi^-1 evaluated at
the Weil pairing value zeta^eps.  V is x for odd n and y for even n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .cyclotomic import CycRat
from .modforms import TorsionLabel, delta, p1_series, tate_xy
from .qseries import QSeries


def is_prime(n: int) -> bool:
    return n > 1 and all(n % p for p in range(2, int(n**0.5) + 1))


def prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def smallest_primitive_root(ell: int) -> int:
    qs = prime_factors(ell - 1)
    for g in range(2, ell):
        if all(pow(g, (ell - 1) // q, ell) != 1 for q in qs):
            return g
    if ell == 2:
        return 1
    raise ValueError(f"no primitive root modulo {ell}")


@lru_cache(maxsize=None)
def discrete_log_table(ell: int) -> dict[int, int]:
    g = smallest_primitive_root(ell)
    return {pow(g, e, ell): e for e in range(ell - 1)}


@dataclass(frozen=True)
class Character:
    """chi^power, where chi(g^e) = zeta_n^e for the smallest primitive root g."""

    ell: int
    n: int
    power: int = 1

    def __post_init__(self):
        if not is_prime(self.ell) or self.ell < 3:
            raise ValueError(f"ell must be an odd prime, got {self.ell}")
        if (self.ell - 1) % self.n or self.n < 2:
            raise ValueError(f"n={self.n} must be a divisor > 1 of ell - 1 = {self.ell - 1}")
        if gcd(self.power, self.n) != 1:
            raise ValueError(f"chi^{self.power} does not have exact order {self.n}")

    @property
    def g(self) -> int:
        return smallest_primitive_root(self.ell)

    def exponent(self, a: int) -> int:
        a %= self.ell
        if a == 0:
            raise ValueError("character evaluated at 0")
        return self.power * discrete_log_table(self.ell)[a] % self.n

    def __call__(self, a: int) -> CycRat:
        return CycRat.zeta(self.n, self.exponent(a))

    def inverse(self) -> "Character":
        return Character(self.ell, self.n, (-self.power) % self.n)

    def __pow__(self, c: int) -> "Character":
        return Character(self.ell, self.n, (self.power * c) % self.n)

    @property
    def is_odd(self) -> bool:
        return self.exponent(-1) != 0


def cyclotomic_gauss(chi: Character, c: int = 1, eps: int = 1) -> CycRat:
    """sum_l chi(l) zeta_ell^(eps * l * c)."""
    ell = chi.ell
    return CycRat.from_exponents(ell * chi.n, (
        (chi.exponent(l) * ell + chi.n * (eps * l * c % ell), 1) for l in range(1, ell)
    ))


@dataclass(frozen=True)
class SigmaSpec:
    ell: int
    n: int
    eps: int = 1

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        Character(self.ell, self.n)

    @property
    def chi(self) -> Character:
        return Character(self.ell, self.n)

    @property
    def coordinate(self) -> str:
        return "x" if self.n % 2 else "y"

    @property
    def r(self) -> int:
        return 4 if self.n % 2 else 3

    @property
    def weight_e(self) -> int:
        return 2 if self.n % 2 else 3

    @property
    def vanishes(self) -> bool:
        """chi even while V = y is odd makes G and H identically zero."""
        return self.n % 2 == 0 and not self.chi.is_odd

    def gauss_constant(self, c: int = 1) -> CycRat:
        return cyclotomic_gauss(self.chi.inverse(), c, self.eps)


def _coord(label: TorsionLabel, which: str, prec: int) -> QSeries:
    x, y = tate_xy(label, prec)
    return x if which == "x" else y


def g_series(spec: SigmaSpec, prec: int, scale: int = 1) -> QSeries:
    """sum_l chi(l) V(l * scale * zeta)."""
    chi, ell = spec.chi, spec.ell
    total = QSeries.zero(prec=prec)
    for lam in range(1, ell):
        label = TorsionLabel.reduce(lam * scale, 0, ell)
        total = total + _coord(label, spec.coordinate, prec) * chi(lam)
    return total


def h_series(spec: SigmaSpec, k: int, prec: int, scale: int = 1) -> QSeries:
    """sum_l chi(l) V(l * scale * zeta^k q^(1/ell))."""
    chi, ell = spec.chi, spec.ell
    total = QSeries.zero(prec=prec)
    for lam in range(1, ell):
        label = TorsionLabel.reduce(k * lam * scale, lam * scale, ell)
        total = total + _coord(label, spec.coordinate, prec) * chi(lam)
    return total


def prefactor(spec: SigmaSpec, prec: int, scale_p: int = 1, scale_q: int = 1, descend: bool = True) -> QSeries:
    """G * gauss * p1^r / Delta, the factor of sigma that has integral exponents."""
    slack = 3
    gauss = spec.gauss_constant(scale_p * scale_q)
    gg = g_series(spec, prec + slack, scale_p) * gauss
    if descend:
        gg = gg.to_subfield(spec.n)
    p1r = p1_series(spec.ell, prec + slack) ** spec.r
    return (gg * p1r / delta(prec + slack + 2)).truncate(prec)


def sigma_series(spec: SigmaSpec, k: int = 0, prec: int = 10, *, scale_p: int = 1, scale_q: int = 1,
                 descend: bool = True) -> QSeries:
    """sigma(k) to absolute precision ``prec``.

    For k = 0 the result is descended to Q(zeta_n); a failure raises
    SubfieldError.  With ``descend=False`` everything is multiplied out in
    Q(zeta_{ell n}) and descended only at the end.
    """
    slack = 2
    pre = prefactor(spec, prec + slack, scale_p, scale_q, descend=descend)
    sig = (pre * h_series(spec, k, prec + slack, scale_q)).truncate(prec)
    if sig.prec is not None and sig.prec < prec:
        raise ArithmeticError(f"sigma reached only q^{sig.prec}, wanted q^{prec}")
    if k % spec.ell == 0:
        sig = sig.to_subfield(spec.n)
    return sig
