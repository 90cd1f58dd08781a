"""Short Weierstrass curves over finite fields and their ell-torsion.

Points are ``(x, y)`` tuples of field elements; ``None`` is the point at
infinity.  The curve is always defined over the prime field (integer a, b)
and may be viewed over any extension.  These routines act as an independent
oracle for the pipeline: brute-force counting, division polynomials, torsion
bases, Frobenius, the Weil pairing and the characteristic equation.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .finite_fields import FiniteField, factor_degrees, legendre, prime_poly_ring

INF = None


class DegenerateCurveError(ValueError):
    pass


def brute_force_count(p: int, a: int, b: int) -> tuple[int, int]:
    """(#E(F_p), trace of Frobenius) by summing Legendre symbols."""
    squares = [0] * p
    for y in range(1, p):
        squares[y * y % p] = 1
    total = 1
    for x in range(p):
        r = (x * x * x + a * x + b) % p
        total += 1 if r == 0 else (2 if squares[r] else 0)
    return total, p + 1 - total


def is_supersingular(p: int, a: int, b: int) -> bool:
    """Hasse invariant: coefficient of x^(p-1) in (x^3 + a x + b)^((p-1)/2)."""
    ring = prime_poly_ring(p)
    f = ring([b, a, 0, 1]) ** ((p - 1) // 2)
    coeffs = f.coeffs()
    return p - 1 >= len(coeffs) or int(coeffs[p - 1]) == 0


@lru_cache(maxsize=None)
def division_polynomial(p: int, a: int, b: int, ell: int):
    """psi_ell in F_p[x] for odd ell (the x-only form, leading coefficient ell)."""
    if ell % 2 == 0:
        raise ValueError("only odd ell is supported")
    ring = prime_poly_ring(p)
    big_f = ring([4 * b, 4 * a, 0, 4]) ** 2
    f = {
        0: ring([0]),
        1: ring([1]),
        2: ring([1]),
        3: ring([-a * a, 12 * b, 6 * a, 0, 3]),
        4: ring([-8 * b * b - a**3, -4 * a * b, -5 * a * a, 20 * b, 5 * a, 0, 1]) * 2,
    }

    def get(n):
        if n in f:
            return f[n]
        k = n // 2
        if n % 2:
            if k % 2 == 0:
                val = big_f * get(k + 2) * get(k) ** 3 - get(k - 1) * get(k + 1) ** 3
            else:
                val = get(k + 2) * get(k) ** 3 - big_f * get(k - 1) * get(k + 1) ** 3
        else:
            val = get(k) * (get(k + 2) * get(k - 1) ** 2 - get(k - 2) * get(k + 1) ** 2)
        f[n] = val
        return val

    return get(ell)


class EllipticCurve:
    """y^2 = x^3 + a x + b with a, b in F_p, viewed over ``field``."""

    def __init__(self, p: int, a: int, b: int, field: FiniteField | None = None):
        self.p, self.a_int, self.b_int = p, a % p, b % p
        if p <= 3:
            raise DegenerateCurveError(f"characteristic {p} is not supported")
        if (4 * a**3 + 27 * b**2) % p == 0:
            raise DegenerateCurveError(f"y^2 = x^3 + {a}x + {b} is singular mod {p}")
        self.field = field if field is not None else FiniteField(p, 1)
        if self.field.p != p:
            raise ValueError("field characteristic does not match the curve")
        self.a = self.field(self.a_int)
        self.b = self.field(self.b_int)

    def base_change(self, field: FiniteField) -> "EllipticCurve":
        return EllipticCurve(self.p, self.a_int, self.b_int, field)

    def __repr__(self):
        return f"EllipticCurve(y^2 = x^3 + {self.a_int}x + {self.b_int} over {self.field})"

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a_int**3 + 27 * self.b_int**2) % self.p

    @property
    def j_invariant(self) -> int:
        a3 = 4 * self.a_int**3
        return 1728 * a3 * pow(a3 + 27 * self.b_int**2, -1, self.p) % self.p

    def rhs(self, x):
        return x * x * x + self.a * x + self.b

    def is_on_curve(self, pt) -> bool:
        if pt is INF:
            return True
        x, y = pt
        return y * y == self.rhs(x)

    def neg(self, pt):
        return INF if pt is INF else (pt[0], -pt[1])

    def add(self, P, Q):
        if P is INF:
            return Q
        if Q is INF:
            return P
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if y1 != y2 or y1 == 0:
                return INF
            lam = (3 * x1 * x1 + self.a) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - x1 - x2
        return (x3, lam * (x1 - x3) - y1)

    def mul(self, k: int, P):
        if k < 0:
            return self.mul(-k, self.neg(P))
        result, base = INF, P
        while k:
            if k & 1:
                result = self.add(result, base)
            base = self.add(base, base)
            k >>= 1
        return result

    def frobenius(self, P, k: int = 1):
        if P is INF:
            return INF
        return (self.field.frobenius(P[0], k), self.field.frobenius(P[1], k))

    def lift_x(self, x):
        """A point with abscissa x, or None when y lies outside the field."""
        r = self.rhs(x)
        if not r.is_square():
            return None
        return (x, r.sqrt())

    def point_key(self, P):
        return (0,) if P is INF else (1,) + self.field.key(P[0]) + self.field.key(P[1])

    # ell-torsion

    def torsion_x_degrees(self, ell: int) -> list[int]:
        psi = division_polynomial(self.p, self.a_int, self.b_int, ell)
        return factor_degrees([int(c) for c in psi.coeffs()], self.p)

    def torsion_points(self, ell: int, seed: int = 0) -> list:
        """All nonzero points of E[ell]; raises if some lie outside the field."""
        psi = division_polynomial(self.p, self.a_int, self.b_int, ell)
        xs = self.field.roots([int(c) for c in psi.coeffs()], seed)
        if len(xs) != (ell * ell - 1) // 2:
            raise ValueError(f"E[{ell}] is not defined over {self.field}")
        pts = []
        for x in xs:
            pt = self.lift_x(x)
            if pt is None:
                raise ValueError(f"E[{ell}] is not defined over {self.field}")
            pts.extend([pt, self.neg(pt)])
        return sorted(pts, key=self.point_key)

    def subgroup(self, P, ell: int) -> list:
        out, acc = [], P
        for _ in range(ell - 1):
            out.append(acc)
            acc = self.add(acc, P)
        if acc is not INF:
            raise ValueError(f"point does not have order {ell}")
        return out

    def torsion_basis(self, ell: int, seed: int = 0):
        if is_supersingular(self.p, self.a_int, self.b_int):
            raise DegenerateCurveError("supersingular curve")
        pts = self.torsion_points(ell, seed)
        P1 = pts[0]
        span = {self.point_key(Q) for Q in self.subgroup(P1, ell)}
        P2 = next(Q for Q in pts if self.point_key(Q) not in span)
        return P1, P2

    def kernel_subgroups(self, ell: int, seed: int = 0) -> list:
        """Generators of the ell + 1 cyclic subgroups: <P1>, <P2 + c P1>."""
        P1, P2 = self.torsion_basis(ell, seed)
        gens = [P1] + [self.add(P2, self.mul(c, P1)) for c in range(ell)]
        seen = set()
        for G in gens:
            key = frozenset(self.point_key(Q) for Q in self.subgroup(G, ell))
            if key in seen:
                raise ValueError("kernel subgroups are not distinct")
            seen.add(key)
        return gens

    # Weil pairing

    def _line(self, T, U, S):
        """Value at S of the line through T and U (tangent if equal), over the vertical at T+U."""
        xt, yt = T
        xs, ys = S
        if U is not INF and T[0] == U[0] and T[1] != U[1]:
            return xs - xt
        if U is not INF and T[0] == U[0] or U is T:
            lam = (3 * xt * xt + self.a) / (2 * yt)
        else:
            lam = (U[1] - yt) / (U[0] - xt)
        num = ys - yt - lam * (xs - xt)
        x3 = lam * lam - xt - U[0]
        return num / (xs - x3)

    def _miller(self, P, S, ell: int):
        T, f = P, self.field.one
        for bit in bin(ell)[3:]:
            f = f * f * self._line(T, T, S)
            T = self.add(T, T)
            if bit == "1":
                f = f * self._line(T, P, S)
                T = self.add(T, P)
        if T is not INF:
            raise ValueError("point order does not divide ell")
        return f

    def weil_pairing(self, P, Q, ell: int):
        if P is INF or Q is INF or P == Q:
            return self.field.one
        if self.point_key(Q) in {self.point_key(R) for R in self.subgroup(P, ell)}:
            return self.field.one
        sign = -1 if ell % 2 else 1
        return sign * self._miller(P, Q, ell) / self._miller(Q, P, ell)
