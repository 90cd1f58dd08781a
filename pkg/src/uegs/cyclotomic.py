"""Exact arithmetic in cyclotomic fields.

An element of Q(zeta_m) is stored in the power basis 1, z, ..., z^(phi(m)-1)
modulo the m-th cyclotomic polynomial, with ``fractions.Fraction`` coefficients.
Operands of different conductors are embedded into the lcm before combining.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from numbers import Rational
from typing import Iterable, Sequence


class ConductorError(ValueError):
    """Raised when an operation needs a conductor that does not fit."""


class SubfieldError(ValueError):
    """Raised when an element is not fixed by the subfield's Galois group."""

    def __init__(self, automorphism: int, conductor: int, target: int):
        super().__init__(
            f"element of Q(zeta_{conductor}) moved by zeta -> zeta^{automorphism}; "
            f"not in Q(zeta_{target})"
        )
        self.automorphism = automorphism


def divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def euler_phi(m: int) -> int:
    result, k, p = m, m, 2
    while p * p <= k:
        if k % p == 0:
            while k % p == 0:
                k //= p
            result -= result // p
        p += 1
    if k > 1:
        result -= result // k
    return result


def units_mod(m: int) -> list[int]:
    if m == 1:
        return [1]
    return [c for c in range(1, m) if gcd(c, m) == 1]


def _exact_divide(num: list[int], den: Sequence[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        out[i] = q
        if q:
            for k, c in enumerate(den):
                num[i + k] -= q * c
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_m, lowest degree first."""
    if m < 1:
        raise ConductorError(f"conductor must be positive, got {m}")
    poly = [-1] + [0] * (m - 1) + [1]
    for d in divisors(m)[:-1]:
        poly = _exact_divide(poly, cyclotomic_polynomial(d))
    return tuple(poly)


@lru_cache(maxsize=None)
def power_table(m: int) -> tuple[tuple[int, ...], ...]:
    """Row e holds the power-basis coordinates of zeta_m^e, 0 <= e < m."""
    phi = euler_phi(m)
    tail = cyclotomic_polynomial(m)[:phi]
    rows = []
    vec = [1] + [0] * (phi - 1)
    for _ in range(m):
        rows.append(tuple(vec))
        top = vec[-1]
        vec = [0] + vec[:-1]
        if top:
            vec = [v - top * t for v, t in zip(vec, tail)]
    return tuple(rows)


def _reduce_raw(m: int, raw: Iterable[tuple[int, Fraction]]) -> list[Fraction]:
    table = power_table(m)
    out = [Fraction(0)] * euler_phi(m)
    for e, c in raw:
        if c:
            for i, t in enumerate(table[e % m]):
                if t:
                    out[i] += c * t
    return out


@lru_cache(maxsize=None)
def _subfield_basis(m: int, d: int):
    """Pivot rows and inverse matrix to read Q(zeta_d) coordinates off Q(zeta_m) ones."""
    table = power_table(m)
    step = m // d
    cols = [table[(i * step) % m] for i in range(euler_phi(d))]
    rows = len(cols[0])
    k = len(cols)
    mat = [[Fraction(cols[c][r]) for c in range(k)] for r in range(rows)]
    pivots, used = [], set()
    basis: list[tuple[list[Fraction], int]] = []
    for r in range(rows):
        v = mat[r][:]
        for b, pc in basis:
            if v[pc]:
                f = v[pc] / b[pc]
                v = [x - f * y for x, y in zip(v, b)]
        nz = next((c for c in range(k) if v[c] and c not in used), None)
        if nz is not None:
            basis.append((v, nz))
            used.add(nz)
            pivots.append(r)
        if len(pivots) == k:
            break
    sub = [mat[r][:] for r in pivots]
    inv = _invert(sub)
    return tuple(pivots), tuple(tuple(row) for row in inv)


def _invert(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def rat_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str) -> Fraction:
    num, sep, den = s.partition("/")
    if not sep:
        raise ValueError(f"rational must be written num/den, got {s!r}")
    if int(den) <= 0:
        raise ValueError(f"denominator must be positive in {s!r}")
    return Fraction(int(num), int(den))


class CycRat:
    """An element of Q(zeta_m)."""

    __slots__ = ("m", "c", "_hash")

    def __init__(self, m: int, coeffs: Sequence):
        phi = euler_phi(m)
        if len(coeffs) != phi:
            raise ConductorError(f"Q(zeta_{m}) needs {phi} coordinates, got {len(coeffs)}")
        self.m = m
        self.c = tuple(Fraction(x) for x in coeffs)
        self._hash = None

    @classmethod
    def rational(cls, x) -> "CycRat":
        return cls(1, [Fraction(x)])

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> "CycRat":
        return cls(m, power_table(m)[k % m])

    @classmethod
    def from_exponents(cls, m: int, raw: Iterable[tuple[int, object]]) -> "CycRat":
        """Build sum c * zeta_m^e from (e, c) pairs with arbitrary integer e."""
        return cls(m, _reduce_raw(m, ((e, Fraction(c)) for e, c in raw)))

    # conversions

    def embed(self, target: int) -> "CycRat":
        if target % self.m:
            raise ConductorError(f"Q(zeta_{self.m}) does not embed in Q(zeta_{target})")
        if target == self.m:
            return self
        step = target // self.m
        return CycRat(target, _reduce_raw(target, ((i * step, x) for i, x in enumerate(self.c))))

    def galois(self, c: int) -> "CycRat":
        """Image under zeta_m -> zeta_m^c."""
        if gcd(c, self.m) != 1:
            raise ConductorError(f"{c} is not a unit modulo {self.m}")
        return CycRat(self.m, _reduce_raw(self.m, ((i * c, x) for i, x in enumerate(self.c))))

    def to_subfield(self, d: int) -> "CycRat":
        if self.m % d:
            raise ConductorError(f"Q(zeta_{d}) is not a subfield of Q(zeta_{self.m})")
        if d == self.m:
            return self
        for c in units_mod(self.m):
            if c % d == 1 % d and c != 1 and self.galois(c) != self:
                raise SubfieldError(c, self.m, d)
        pivots, inv = _subfield_basis(self.m, d)
        rhs = [self.c[r] for r in pivots]
        out = CycRat(d, [sum((a * b for a, b in zip(row, rhs)), Fraction(0)) for row in inv])
        if out.embed(self.m).c != self.c:
            raise SubfieldError(0, self.m, d)
        return out

    def minimal_conductor(self) -> "CycRat":
        for d in divisors(self.m):
            try:
                return self.to_subfield(d)
            except SubfieldError:
                continue
        return self

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[0]

    def is_zero(self) -> bool:
        return not any(self.c)

    def denominator(self) -> int:
        return lcm(*(x.denominator for x in self.c))

    # arithmetic

    @staticmethod
    def _coerce(x) -> "CycRat":
        if isinstance(x, CycRat):
            return x
        if isinstance(x, (int, Rational)):
            return CycRat(1, [Fraction(x)])
        return NotImplemented

    def _pair(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        m = lcm(self.m, other.m)
        return self.embed(m), other.embed(m)

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycRat(a.m, [x + y for x, y in zip(a.c, b.c)])

    __radd__ = __add__

    def __neg__(self):
        return CycRat(self.m, [-x for x in self.c])

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycRat(a.m, [x - y for x, y in zip(a.c, b.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, CycRat):
            f = Fraction(other)
            return CycRat(self.m, [x * f for x in self.c])
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        raw: dict[int, Fraction] = {}
        for i, x in enumerate(a.c):
            if x:
                for j, y in enumerate(b.c):
                    if y:
                        raw[i + j] = raw.get(i + j, 0) + x * y
        return CycRat(a.m, _reduce_raw(a.m, raw.items()))

    __rmul__ = __mul__

    def inverse(self) -> "CycRat":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        phi_m = [Fraction(x) for x in cyclotomic_polynomial(self.m)]
        s = _poly_inverse_mod([x for x in self.c], phi_m)
        return CycRat(self.m, s + [Fraction(0)] * (euler_phi(self.m) - len(s)))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = CycRat(self.m, power_table(self.m)[0])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a.c == b.c

    def __hash__(self):
        if self._hash is None:
            low = self.minimal_conductor()
            self._hash = hash(low.c[0]) if low.m == 1 else hash((low.m, low.c))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    # serialisation

    def to_json(self) -> dict:
        return {"m": self.m, "c": [rat_to_str(x) for x in self.c]}

    @classmethod
    def from_json(cls, obj: dict) -> "CycRat":
        if set(obj) != {"m", "c"}:
            raise ValueError(f"cyclotomic value needs keys m and c, got {sorted(obj)}")
        return cls(int(obj["m"]), [rat_from_str(s) for s in obj["c"]])

    def __str__(self):
        terms = []
        for i, x in enumerate(self.c):
            if not x:
                continue
            mono = "" if i == 0 else (f"z{self.m}" if i == 1 else f"z{self.m}^{i}")
            if not mono:
                body = str(x)
            elif x == 1:
                body = mono
            elif x == -1:
                body = "-" + mono
            else:
                body = f"{x}*{mono}"
            terms.append(body)
        if not terms:
            return "0"
        out = terms[0]
        for t in terms[1:]:
            out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
        return out

    def __repr__(self):
        return f"CycRat({self.m}, {str(self)!r})"


def _poly_trim(a: list[Fraction]) -> list[Fraction]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a: list[Fraction], b: list[Fraction]):
    a = _poly_trim(a[:])
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    inv = 1 / b[-1]
    while len(a) >= len(b):
        f = a[-1] * inv
        shift = len(a) - len(b)
        q[shift] = f
        for i, y in enumerate(b):
            a[shift + i] -= f * y
        a.pop()
        _poly_trim(a)
    return q, a


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return _poly_trim([x - y for x, y in zip(a, b)])


def _poly_inverse_mod(a: list[Fraction], modulus: list[Fraction]) -> list[Fraction]:
    r0, r1 = modulus[:], _poly_trim(a[:])
    s0, s1 = [], [Fraction(1)]
    while len(r1) > 1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    if not r1:
        raise ZeroDivisionError("element is not invertible")
    inv = 1 / r1[0]
    _, rem = _poly_divmod([x * inv for x in s1], modulus)
    return rem
