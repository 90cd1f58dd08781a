"""Truncated Puiseux series in q^(1/d) with cyclotomic coefficients.

A series is stored as ``phi(m)`` integer polynomials (one per power-basis
coordinate of Q(zeta_m)) sharing a positive common denominator.  Slot ``i`` of
every layer holds the coefficient of q^((val + i)/d).  Precision is absolute:
``prec`` is the exponent numerator from which nothing is known, or ``None`` for
an exact (finite) series.  The dense kernel is FLINT's ``fmpz_poly``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from numbers import Rational
from typing import Iterator

from flint import fmpz_poly

from .cyclotomic import (
    CycRat,
    ConductorError,
    SubfieldError,
    _subfield_basis,
    cyclotomic_polynomial,
    euler_phi,
    power_table,
    units_mod,
)


class ZeroSeriesError(ArithmeticError):
    """Raised when an order or leading term is requested of a zero series.

    ``exact`` tells a genuinely zero series apart from one that is only zero
    up to its precision.
    """

    def __init__(self, exact: bool):
        what = "exact zero series" if exact else "series is zero to its precision"
        super().__init__(what)
        self.exact = exact


_ZERO = fmpz_poly()


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _linear_map(layers, rows, phi_out):
    """out[t] = sum_i rows[i][t] * layers[i] for integer matrices ``rows``."""
    out = [fmpz_poly() for _ in range(phi_out)]
    for layer, row in zip(layers, rows):
        if layer.is_zero():
            continue
        for t, c in enumerate(row):
            if c:
                out[t] += layer * c
    return out


def _reduce_layers(raw, m):
    """Fold raw[e] (coefficient of zeta^e, e < 2 phi - 1) onto the power basis."""
    phi = euler_phi(m)
    tail = cyclotomic_polynomial(m)[:phi]
    for e in range(len(raw) - 1, phi - 1, -1):
        top = raw[e]
        if top.is_zero():
            continue
        base = e - phi
        for k, c in enumerate(tail):
            if c:
                raw[base + k] -= top * c
    return raw[:phi]


class QSeries:
    __slots__ = ("d", "m", "val", "pnum", "den", "layers")

    def __init__(self, layers, *, val=0, d=1, m=1, prec=None, den=1):
        """Low-level constructor; ``val`` and ``prec`` are exponent numerators."""
        phi = euler_phi(m)
        layers = [p if isinstance(p, fmpz_poly) else fmpz_poly(list(p)) for p in layers]
        if len(layers) != phi:
            raise ConductorError(f"Q(zeta_{m}) series needs {phi} layers")
        if den <= 0:
            raise ValueError("denominator must be positive")
        if prec is not None:
            n = prec - val
            if n <= 0:
                layers = [_ZERO] * phi
            else:
                layers = [p.truncate(n) if p.length() > n else p for p in layers]
        if all(p.is_zero() for p in layers):
            self.d, self.m, self.den = d, m, 1
            self.val = prec if prec is not None else 0
            self.pnum = prec
            self.layers = tuple(_ZERO for _ in range(phi))
            return
        k = 0
        while all(p[k] == 0 for p in layers):
            k += 1
        if k:
            layers = [p.right_shift(k) for p in layers]
        g = den
        for p in layers:
            if g == 1:
                break
            g = gcd(g, int(p.content()))
        if g > 1:
            layers = [p // g for p in layers]
            den //= g
        self.d, self.m, self.val, self.pnum, self.den = d, m, val + k, prec, den
        self.layers = tuple(layers)

    # construction

    @classmethod
    def from_ints(cls, coeffs, *, val=0, d=1, prec=None, den=1) -> "QSeries":
        return cls([fmpz_poly(list(coeffs))], val=val, d=d, prec=prec, den=den)

    @classmethod
    def from_dict(cls, terms: dict, *, d=None, prec=None) -> "QSeries":
        """Build from {exponent: coefficient}; ``prec`` is an absolute q-exponent."""
        exps = [Fraction(e) for e in terms]
        if d is None:
            d = lcm(1, *(e.denominator for e in exps))
            if prec is not None:
                d = lcm(d, Fraction(prec).denominator)
        vals = {e: c if isinstance(c, CycRat) else CycRat.rational(c) for e, c in zip(exps, terms.values())}
        m = lcm(1, *(c.m for c in vals.values()))
        pnum = None if prec is None else _numerator(prec, d)
        if not vals:
            return cls.zero(d=d, m=m, prec=prec)
        nums = {_numerator(e, d): c.embed(m) for e, c in vals.items()}
        lo, hi = min(nums), max(nums)
        den = lcm(1, *(c.denominator() for c in nums.values()))
        phi = euler_phi(m)
        cols = [[0] * (hi - lo + 1) for _ in range(phi)]
        for e, c in nums.items():
            for t, x in enumerate(c.c):
                cols[t][e - lo] = int(x * den)
        return cls(cols, val=lo, d=d, m=m, prec=pnum, den=den)

    @classmethod
    def zero(cls, *, d=1, m=1, prec=None) -> "QSeries":
        pnum = None if prec is None else _numerator(prec, d)
        return cls([_ZERO] * euler_phi(m), val=0, d=d, m=m, prec=pnum)

    @classmethod
    def constant(cls, c, *, d=1, prec=None) -> "QSeries":
        return cls.from_dict({0: c}, d=d, prec=prec)

    @classmethod
    def monomial(cls, exponent, c=1, *, d=None, prec=None) -> "QSeries":
        return cls.from_dict({Fraction(exponent): c}, d=d, prec=prec)

    # basic queries

    @property
    def prec(self):
        return None if self.pnum is None else Fraction(self.pnum, self.d)

    @property
    def conductor(self) -> int:
        return self.m

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.layers)

    def is_exact(self) -> bool:
        return self.pnum is None

    def _length(self) -> int:
        return max(p.length() for p in self.layers)

    def valuation(self) -> int:
        """Exponent numerator of the leading term."""
        if self.is_zero():
            raise ZeroSeriesError(self.pnum is None)
        return self.val

    def order(self) -> Fraction:
        return Fraction(self.valuation(), self.d)

    def _coeff_at(self, i: int) -> CycRat:
        vec = [Fraction(int(p[i]), self.den) if i < p.length() else 0 for p in self.layers]
        return CycRat(self.m, vec)

    def coefficient(self, exponent) -> CycRat:
        exponent = Fraction(exponent)
        if self.prec is not None and exponent >= self.prec:
            raise ValueError(f"coefficient of q^{exponent} lies beyond precision {self.prec}")
        if (exponent * self.d).denominator != 1:
            return CycRat(self.m, [0] * euler_phi(self.m))
        e = _numerator(exponent, self.d)
        i = e - self.val
        if i < 0:
            return CycRat(self.m, [0] * euler_phi(self.m))
        return self._coeff_at(i)

    def leading_coefficient(self) -> CycRat:
        self.valuation()
        return self._coeff_at(0)

    def items(self) -> Iterator[tuple[Fraction, CycRat]]:
        """Nonzero terms as (exponent, coefficient), increasing exponent."""
        if self.is_zero():
            return
        for i in range(self._length()):
            c = self._coeff_at(i)
            if not c.is_zero():
                yield Fraction(self.val + i, self.d), c

    def dump(self, count: int | None = None) -> str:
        """Debug listing, one ``e/d : value`` line per stored slot."""
        lines = []
        hi = self._length() if count is None else count
        for i in range(hi):
            e = self.val + i
            if self.pnum is not None and e >= self.pnum:
                break
            lines.append(f"{e}/{self.d} : {self._coeff_at(i)}")
        return "\n".join(lines) + ("\n" if lines else "")

    # conversions

    def with_denominator(self, d: int) -> "QSeries":
        if d % self.d:
            raise ValueError(f"cannot re-index q^(1/{self.d}) series to q^(1/{d})")
        k = d // self.d
        if k == 1:
            return self
        pnum = None if self.pnum is None else self.pnum * k
        return QSeries([p.inflate(k) for p in self.layers], val=self.val * k, d=d, m=self.m, prec=pnum, den=self.den)

    def embed(self, m: int) -> "QSeries":
        if m % self.m:
            raise ConductorError(f"Q(zeta_{self.m}) does not embed in Q(zeta_{m})")
        if m == self.m:
            return self
        table = power_table(m)
        step = m // self.m
        rows = [table[i * step % m] for i in range(len(self.layers))]
        return QSeries(_linear_map(self.layers, rows, euler_phi(m)), val=self.val, d=self.d, m=m, prec=self.pnum, den=self.den)

    def galois(self, c: int) -> "QSeries":
        if gcd(c, self.m) != 1:
            raise ConductorError(f"{c} is not a unit modulo {self.m}")
        table = power_table(self.m)
        rows = [table[i * c % self.m] for i in range(len(self.layers))]
        return QSeries(_linear_map(self.layers, rows, len(self.layers)), val=self.val, d=self.d, m=self.m, prec=self.pnum, den=self.den)

    def to_subfield(self, target: int) -> "QSeries":
        """Descend every coefficient to Q(zeta_target); raises SubfieldError."""
        if self.m % target:
            raise ConductorError(f"Q(zeta_{target}) is not a subfield of Q(zeta_{self.m})")
        if target == self.m:
            return self
        for c in units_mod(self.m):
            if c != 1 and c % target == 1 % target and not (self.galois(c) - self).is_zero():
                raise SubfieldError(c, self.m, target)
        pivots, inv = _subfield_basis(self.m, target)
        scale = lcm(1, *(x.denominator for row in inv for x in row))
        out = []
        for row in inv:
            acc = fmpz_poly()
            for x, r in zip(row, pivots):
                if x:
                    acc += self.layers[r] * int(x * scale)
            out.append(acc)
        res = QSeries(out, val=self.val, d=self.d, m=target, prec=self.pnum, den=self.den * scale)
        if not (res.embed(self.m) - self).is_zero():
            raise SubfieldError(0, self.m, target)
        return res

    def _align(self, other: "QSeries"):
        d = lcm(self.d, other.d)
        m = lcm(self.m, other.m)
        return self.with_denominator(d).embed(m), other.with_denominator(d).embed(m)

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Rational, CycRat)):
            return QSeries.constant(other)
        return NotImplemented

    # arithmetic

    def __neg__(self):
        return QSeries([-p for p in self.layers], val=self.val, d=self.d, m=self.m, prec=self.pnum, den=self.den)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._align(other)
        val = min(a.val, b.val)
        den = lcm(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        layers = []
        for pa, pb in zip(a.layers, b.layers):
            x = pa if fa == 1 else pa * fa
            y = pb if fb == 1 else pb * fb
            layers.append(x.left_shift(a.val - val) + y.left_shift(b.val - val))
        return QSeries(layers, val=val, d=a.d, m=a.m, prec=_min_prec(a.pnum, b.pnum), den=den)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, c) -> "QSeries":
        if isinstance(c, CycRat):
            if c.m == 1:
                c = c.c[0]
            else:
                return self._scale_cyclotomic(c)
        c = Fraction(c)
        return QSeries([p * c.numerator for p in self.layers], val=self.val, d=self.d, m=self.m, prec=self.pnum, den=self.den * c.denominator)

    def _scale_cyclotomic(self, c: CycRat) -> "QSeries":
        m = lcm(self.m, c.m)
        a = self.embed(m)
        c = c.embed(m)
        cden = c.denominator()
        ints = [int(x * cden) for x in c.c]
        phi = euler_phi(m)
        raw = [fmpz_poly() for _ in range(2 * phi - 1)]
        for i, p in enumerate(a.layers):
            if p.is_zero():
                continue
            for j, x in enumerate(ints):
                if x:
                    raw[i + j] += p * x
        return QSeries(_reduce_layers(raw, m), val=a.val, d=a.d, m=m, prec=a.pnum, den=a.den * cden)

    def __mul__(self, other):
        if isinstance(other, (int, Rational, CycRat)):
            return self._scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = self._align(other)
        za, zb = a.is_zero(), b.is_zero()
        ord_a = a.pnum if za else a.val
        ord_b = b.pnum if zb else b.val
        terms = []
        if a.pnum is not None and ord_b is not None:
            terms.append(a.pnum + ord_b)
        if b.pnum is not None and ord_a is not None:
            terms.append(b.pnum + ord_a)
        prec = min(terms) if terms else None
        if za or zb:
            return QSeries([_ZERO] * len(a.layers), d=a.d, m=a.m, prec=prec)
        val = a.val + b.val
        n = None if prec is None else prec - val
        if n is not None and n <= 0:
            return QSeries([_ZERO] * len(a.layers), d=a.d, m=a.m, prec=prec)
        phi = len(a.layers)
        raw = [fmpz_poly() for _ in range(2 * phi - 1)]
        for i, pa in enumerate(a.layers):
            if pa.is_zero():
                continue
            for j, pb in enumerate(b.layers):
                if pb.is_zero():
                    continue
                raw[i + j] += pa * pb if n is None else pa.mul_low(pb, n)
        return QSeries(_reduce_layers(raw, a.m), val=val, d=a.d, m=a.m, prec=prec, den=a.den * b.den)

    __rmul__ = __mul__

    def inverse(self, prec=None) -> "QSeries":
        """Multiplicative inverse by Newton iteration.

        An exact series needs an explicit absolute target ``prec``.
        """
        if self.is_zero():
            raise ZeroDivisionError("inverse of a zero series")
        o = self.val
        if self.pnum is None and prec is None and self._length() == 1:
            c = self._coeff_at(0).inverse()
            return QSeries.monomial(Fraction(-o, self.d), c, d=self.d)
        if self.pnum is None:
            if prec is None:
                raise ValueError("inverse of an exact series needs a target precision")
            length = _numerator(prec, self.d) + o
        else:
            length = self.pnum - o
        if length <= 0:
            return QSeries.zero(d=self.d, m=self.m, prec=Fraction(-o + length, self.d))
        unit = QSeries(self.layers, val=0, d=self.d, m=self.m, prec=length, den=self.den)
        inv0 = unit._coeff_at(0).inverse()
        g = QSeries.constant(inv0).with_denominator(self.d)
        n = 1
        while n < length:
            n = min(2 * n, length)
            u = unit.truncate_num(n)
            g = g * (2 - u * g)
            # Newton doubles the correct range; drop the conservative bound
            g = QSeries(g.layers, val=g.val, d=g.d, m=g.m, prec=None, den=g.den)
        return QSeries(g.layers, val=g.val - o, d=self.d, m=g.m, prec=length - o, den=g.den)

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self._scale(1 / Fraction(other))
        if isinstance(other, CycRat):
            return self._scale(other.inverse())
        if not isinstance(other, QSeries):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = QSeries.constant(1).with_denominator(self.d)
        base = self
        while True:
            if k & 1:
                result = result * base
            k >>= 1
            if not k:
                break
            base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            other = self._coerce(other)
            if other is NotImplemented:
                return NotImplemented
        return self.prec == other.prec and (self - other).is_zero()

    def agrees_with(self, other) -> bool:
        """Equal on the common range of precision."""
        return (self - self._coerce(other)).is_zero()

    __hash__ = None

    # structural operations

    def truncate_num(self, pnum: int) -> "QSeries":
        return QSeries(self.layers, val=self.val, d=self.d, m=self.m, prec=_min_prec(self.pnum, pnum), den=self.den)

    def truncate(self, prec) -> "QSeries":
        """Forget everything from absolute q-exponent ``prec`` on."""
        return self.truncate_num(_numerator(prec, self.d))

    def shift(self, exponent) -> "QSeries":
        """Multiply by q^exponent."""
        k = _numerator(exponent, self.d)
        pnum = None if self.pnum is None else self.pnum + k
        if self.is_zero():
            return QSeries(self.layers, d=self.d, m=self.m, prec=pnum)
        return QSeries(self.layers, val=self.val + k, d=self.d, m=self.m, prec=pnum, den=self.den)

    def substitute_power(self, k: int) -> "QSeries":
        """q -> q^k."""
        pnum = None if self.pnum is None else self.pnum * k
        return QSeries([p.inflate(k) for p in self.layers], val=self.val * k, d=self.d, m=self.m, prec=pnum, den=self.den)

    def substitute_root(self, k: int) -> "QSeries":
        """q -> q^(1/k)."""
        return QSeries(self.layers, val=self.val, d=self.d * k, m=self.m, prec=self.pnum, den=self.den)

    def _residue_classes(self):
        """Split each layer by exponent numerator modulo d."""
        d = self.d
        parts = [[None] * len(self.layers) for _ in range(d)]
        for t, p in enumerate(self.layers):
            coeffs = p.coeffs()
            for r in range(d):
                start = (r - self.val) % d
                if start >= len(coeffs):
                    parts[r][t] = _ZERO
                    continue
                lst = [0] * len(coeffs)
                lst[start::d] = coeffs[start::d]
                parts[r][t] = fmpz_poly(lst)
        return parts

    def twist(self, k: int) -> "QSeries":
        """Multiply the coefficient of q^(e/d) by zeta_d^(k e)."""
        d = self.d
        if k % d == 0:
            return self
        m = lcm(self.m, d)
        base = self.embed(m)
        table = power_table(m)
        step = m // d
        phi = euler_phi(m)
        out = [fmpz_poly() for _ in range(phi)]
        for r, part in enumerate(base._residue_classes()):
            shift = (k * r * step) % m
            rows = [table[(i + shift) % m] for i in range(phi)]
            for t, p in enumerate(_linear_map(part, rows, phi)):
                out[t] += p
        return QSeries(out, val=base.val, d=d, m=m, prec=base.pnum, den=base.den)

    def integer_part(self) -> "QSeries":
        """Terms with integer exponent, as a series in q."""
        d = self.d
        pnum = None if self.pnum is None else -(-self.pnum // d)
        if d == 1:
            return self
        start = (-self.val) % d
        layers = []
        for p in self.layers:
            coeffs = p.coeffs()
            layers.append(fmpz_poly(coeffs[start::d]))
        return QSeries(layers, val=(self.val + start) // d, d=1, m=self.m, prec=pnum, den=self.den)

    def trace(self) -> "QSeries":
        """Sum of all twists, i.e. d times the integer-exponent part."""
        return self.integer_part() * self.d

    def trace_by_twists(self) -> "QSeries":
        """Same as :meth:`trace`, computed literally as a sum of twists."""
        total = self
        for k in range(1, self.d):
            total = total + self.twist(k)
        total = total.to_subfield(self.m)
        whole = total.integer_part()
        if not (total - whole.with_denominator(self.d)).is_zero():
            raise ArithmeticError("twists did not cancel the fractional exponents")
        return whole

    def __repr__(self):
        return f"QSeries(d={self.d}, m={self.m}, val={self.val}, prec={self.prec}, len={self._length()})"

    def __reduce__(self):
        return (_rebuild, (tuple(tuple(int(x) for x in p.coeffs()) for p in self.layers), self.val, self.d, self.m, self.pnum, self.den))


def _rebuild(layers, val, d, m, pnum, den):
    return QSeries([fmpz_poly(list(p)) for p in layers], val=val, d=d, m=m, prec=pnum, den=den)


def _numerator(exponent, d: int) -> int:
    e = Fraction(exponent) * d
    if e.denominator != 1:
        raise ValueError(f"exponent {exponent} is not a multiple of 1/{d}")
    return e.numerator


def as_series(x) -> QSeries:
    return x if isinstance(x, QSeries) else QSeries.constant(x)
