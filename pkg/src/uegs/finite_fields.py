"""Finite fields F_{p^k} with a canonical defining polynomial.

Element arithmetic is delegated to FLINT (``fq_default``).  The modulus is the
lexicographically first monic irreducible polynomial of the requested degree,
so every run builds the same field and element encodings are reproducible.
Root finding is equal-degree splitting with a seeded generator.
"""

from __future__ import annotations

import random
from functools import lru_cache
from math import lcm

from flint import fmpz_mod_poly_ctx, fq_default_ctx, fq_default_poly_ctx

from .gauss import is_prime, prime_factors


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def multiplicative_order(a: int, n: int) -> int:
    k, x = 1, a % n
    while x != 1 % n:
        x = x * a % n
        k += 1
    return k


@lru_cache(maxsize=None)
def prime_poly_ring(p: int):
    return fmpz_mod_poly_ctx(p)


@lru_cache(maxsize=None)
def first_irreducible(p: int, degree: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the lexicographically first monic irreducible."""
    ring = prime_poly_ring(p)
    if degree == 1:
        return (0, 1)
    k = 0
    while True:
        coeffs, x = [], k
        for _ in range(degree):
            coeffs.append(x % p)
            x //= p
        if coeffs[0]:
            poly = ring(coeffs + [1])
            if poly.is_irreducible():
                return tuple(coeffs + [1])
        k += 1


def factor_degrees(coeffs, p: int) -> list[int]:
    """Degrees of the irreducible factors of a squarefree F_p polynomial (with multiplicity)."""
    ring = prime_poly_ring(p)
    f = ring(list(coeffs)).monic()
    x = ring([0, 1])
    out: list[int] = []
    h = x
    d = 0
    while f.degree() > 0:
        d += 1
        if 2 * d > f.degree():
            out.append(f.degree())
            break
        h = h.pow_mod(p, f)
        g = f.gcd(h - x)
        if g.degree() > 0:
            out.extend([d] * (g.degree() // d))
            f = f.exact_division(g)
            h = h % f if f.degree() > 0 else h
    return sorted(out)


class FiniteField:
    """F_{p^degree} with its canonical modulus."""

    def __init__(self, p: int, degree: int = 1):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.degree = degree
        self.order = p**degree
        self.modulus = first_irreducible(p, degree)
        self.ctx = fq_default_ctx(p, modulus=prime_poly_ring(p)(list(self.modulus)))
        self.poly_ring = fq_default_poly_ctx(self.ctx)
        self.zero = self.ctx.zero()
        self.one = self.ctx.one()

    def __repr__(self):
        return f"FiniteField({self.p}, {self.degree})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.degree) == (other.p, other.degree)

    def __hash__(self):
        return hash((self.p, self.degree))

    def __call__(self, x):
        if isinstance(x, (list, tuple)):
            return self.ctx(list(x))
        return self.ctx(x)

    def from_rational(self, num: int, den: int = 1):
        if den % self.p == 0:
            raise ZeroDivisionError(f"denominator {den} vanishes modulo {self.p}")
        return self.ctx(num) / self.ctx(den)

    def key(self, x) -> tuple[int, ...]:
        """Canonical sort key: coordinates in the power basis, padded."""
        coords = [int(c) for c in x.to_list()]
        return tuple(coords + [0] * (self.degree - len(coords)))

    def encode(self, x) -> list[int]:
        return list(self.key(x))

    def random_element(self, rng: random.Random):
        return self.ctx([rng.randrange(self.p) for _ in range(self.degree)])

    def frobenius(self, x, k: int = 1):
        k %= self.degree
        return x if k == 0 else x.frobenius(k)

    def contains_degree(self, k: int) -> bool:
        return self.degree % k == 0

    def nth_root_of_unity(self, n: int):
        """Deterministic element of exact order n."""
        if (self.order - 1) % n:
            raise ValueError(f"F_{self.p}^{self.degree} has no primitive {n}-th root of unity")
        qs = prime_factors(n)
        k = 2
        while True:
            coords, x = [], k
            for _ in range(self.degree):
                coords.append(x % self.p)
                x //= self.p
            w = self.ctx(coords) ** ((self.order - 1) // n)
            if all(w ** (n // r) != self.one for r in qs):
                return w
            k += 1

    def discrete_log_mu(self, x, zeta, n: int) -> int:
        """e with zeta^e = x, for x an n-th root of unity."""
        acc = self.one
        for e in range(n):
            if acc == x:
                return e
            acc *= zeta
        raise ValueError("value is not a power of the given root of unity")

    def poly(self, coeffs):
        return self.poly_ring([self(c) if not hasattr(c, "to_list") else c for c in coeffs])

    def roots(self, coeffs, seed: int = 0) -> list:
        """Distinct roots in this field of the polynomial with the given coefficients."""
        f = self.poly(coeffs)
        if f.is_zero():
            raise ValueError("zero polynomial has every element as a root")
        f = f.monic()
        x = self.poly_ring([0, 1])
        split = f.gcd(x.pow_mod(self.order, f) - x)
        rng = random.Random(seed)
        found = self._split(split, rng)
        return sorted(found, key=self.key)

    def _split(self, g, rng):
        deg = g.degree()
        if deg <= 0:
            return []
        if deg == 1:
            g = g.monic()
            return [-g.coeffs()[0]]
        half = (self.order - 1) // 2
        while True:
            delta = self.random_element(rng)
            s = self.poly_ring([delta, 1]).pow_mod(half, g) - 1
            d = g.gcd(s)
            if 0 < d.degree() < deg:
                return self._split(d.monic(), rng) + self._split(g.exact_division(d).monic(), rng)


def splitting_degree(degrees, extra=()) -> int:
    return lcm(1, *degrees, *extra)
