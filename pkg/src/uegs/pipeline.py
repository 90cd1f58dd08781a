"""Trace of Frobenius modulo an Atkin prime from precomputed representations.

For E/F_p and an Atkin prime ell whose isogeny polynomial M_ell(X, j(E)) has
irreducible factors of degree r > 2, pick a root m, let m' = m^p and
m'' = m^(p^2), and form

    A = R(j, m, m') / R(j, m, m'').

With P a generator of the kernel attached to m and Gamma = G(E, P)^n,

    chi^-1(t) = A * Gamma^((p^2 - p)/n)      when p = 1 mod n,

and a product over chi^(p') sums in general.  The indices of t modulo each
n | ell - 1 are glued by CRT.  The value Gamma comes from a provider; the
built-in one computes it from explicit torsion points and stands in for a
separate precomputation.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from pathlib import Path
from typing import Protocol

from .curves import DegenerateCurveError, EllipticCurve, is_supersingular
from .cyclotomic import CycRat
from .finite_fields import FiniteField, factor_degrees, legendre, multiplicative_order, prime_poly_ring
from .gauss import Character, discrete_log_table, is_prime, smallest_primitive_root
from .modforms import EtaQuotientSpec, delta, eisenstein_e4, eisenstein_e6, j_invariant, m_ell, p1_series
from .modpoly import ModularPolynomial
from .representation import (
    MonomialCache,
    MulCounter,
    RationalRepresentation,
    evaluate,
    specialize_tensor,
    stage_b,
)
from .qseries import QSeries

log = logging.getLogger(__name__)


class PipelineError(Exception):
    exit_code = 1

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class DegenerateInputError(PipelineError):
    exit_code = 2


class NotAtkinError(PipelineError):
    exit_code = 3


class VerificationError(PipelineError):
    exit_code = 4


@dataclass(frozen=True)
class CurveInstance:
    p: int
    a: int
    b: int

    def validate(self, ell: int | None = None) -> None:
        if not is_prime(self.p) or self.p <= 3:
            raise DegenerateInputError(f"p = {self.p} must be a prime > 3")
        if (4 * self.a**3 + 27 * self.b**2) % self.p == 0:
            raise DegenerateInputError("singular curve")
        if self.a % self.p == 0 or self.b % self.p == 0:
            raise DegenerateInputError("j-invariant 0 or 1728 is excluded")
        if ell is not None:
            if not is_prime(ell) or ell < 5:
                raise DegenerateInputError(f"ell = {ell} must be a prime >= 5")
            if ell == self.p:
                raise DegenerateInputError("ell must differ from p")

    def curve(self, field: FiniteField | None = None) -> EllipticCurve:
        try:
            return EllipticCurve(self.p, self.a, self.b, field)
        except DegenerateCurveError as exc:
            raise DegenerateInputError(str(exc)) from exc

    @property
    def j(self) -> int:
        return self.curve().j_invariant


@dataclass(frozen=True)
class ClassifyResult:
    kind: str  # "Elkies", "Atkin" or "special"
    r: int
    degrees: tuple[int, ...]


def isogeny_polynomial(inst: CurveInstance, modpoly: ModularPolynomial) -> list[int]:
    """Coefficients of M_ell(X, j(E)) over F_p, low degree first."""
    p = inst.p
    return [int(c) % p for c in modpoly.coefficients_in_x(inst.j, convert=lambda c: Fraction(c).numerator * pow(Fraction(c).denominator, -1, p) % p)]


def classify(inst: CurveInstance, ell: int, modpoly: ModularPolynomial) -> ClassifyResult:
    inst.validate(ell)
    coeffs = isogeny_polynomial(inst, modpoly)
    poly = prime_poly_ring(inst.p)(coeffs)
    if not poly.is_squarefree():
        return ClassifyResult("special", 0, ())
    degrees = tuple(factor_degrees(coeffs, inst.p))
    if 1 in degrees:
        return ClassifyResult("Elkies", 1, degrees)
    if len(set(degrees)) != 1:
        raise VerificationError(f"Atkin factor degrees {degrees} are not all equal")
    return ClassifyResult("Atkin", degrees[0], degrees)


def coefficient_map(field: FiniteField, zeta_n, n: int):
    """CycRat (over Q(zeta_n)) or rational -> field element, zeta_n -> zeta_n image."""
    powers = [field.one]
    for _ in range(1, max(n, 2)):
        powers.append(powers[-1] * zeta_n)

    def convert(c):
        if isinstance(c, CycRat):
            if c.m == 1:
                c = c.c[0]
            else:
                c = c.embed(n) if c.m != n else c
                acc = field.zero
                for i, x in enumerate(c.c):
                    if x:
                        acc += field.from_rational(x.numerator, x.denominator) * powers[i]
                return acc
        c = Fraction(c)
        return field.from_rational(c.numerator, c.denominator)

    return convert


# auxiliary representations used to attach roots to kernels

AUX_NAMES = ("p1^6/Delta", "p1^4*E4/Delta", "p1^3*E6/Delta")


def _aux_series(name: str, ell: int, prec: int) -> QSeries:
    p1 = p1_series(ell, prec + 2)
    dinv = delta(prec + 4).inverse()
    if name == "p1^6/Delta":
        f = p1**6 * dinv
    elif name == "p1^4*E4/Delta":
        f = p1**4 * eisenstein_e4(prec + 2) * dinv
    elif name == "p1^3*E6/Delta":
        f = p1**3 * eisenstein_e6(prec + 2) * dinv
    else:
        raise KeyError(name)
    return f.truncate(prec)


@lru_cache(maxsize=None)
def aux_representation(ell: int, name: str, modpoly: ModularPolynomial) -> dict[tuple[int, int], Fraction]:
    """Write a Gamma_0(ell) function f as Q(m, j) / M_Y(m, j)."""
    eta = EtaQuotientSpec.for_ell(ell)
    v = eta.v
    window = 4 * (ell + 1) * v + 24
    prec = window + 2 * v + 6
    m, j = m_ell(ell, prec), j_invariant(prec)
    my = modpoly.partial_y().evaluate(m, j)
    h = _aux_series(name, ell, prec) * my
    mono = MonomialCache(m / Fraction(ell) ** eta.s, j)
    out = stage_b(h, mono, ell, v, eta.s, window, 10**9)
    top = max((i2 * v - i3 for i2, i3 in out), default=0)
    if top + 12 > window:
        raise VerificationError(f"auxiliary function {name} does not reduce to a polynomial")
    return {k: c.rational_value() for k, c in out.items()}


def _eval_aux(coeffs: dict, modpoly: ModularPolynomial, field: FiniteField, j, m):
    conv = coefficient_map(field, field.one, 1)
    num = field.zero
    for (i2, i3), c in coeffs.items():
        num += conv(c) * m**i2 * j**i3
    den = modpoly.partial_y().evaluate(m, j, convert=conv)
    if den == field.zero:
        raise VerificationError("M_Y vanishes at the chosen root")
    return num / den


class WorkingContext:
    """E over F_{p^M} together with the data attached to ell."""

    def __init__(self, inst: CurveInstance, ell: int, modpoly: ModularPolynomial, degree: int, seed: int = 0):
        self.inst, self.ell, self.modpoly, self.seed = inst, ell, modpoly, seed
        self.field = FiniteField(inst.p, degree)
        self.curve = inst.curve(self.field)
        self.j = self.field(inst.j)
        self._kernels = None

    @property
    def p(self) -> int:
        return self.inst.p

    def isogeny_roots(self) -> list:
        return self.field.roots(isogeny_polynomial(self.inst, self.modpoly), self.seed)

    def kernels(self) -> list:
        if self._kernels is None:
            self._kernels = self.curve.kernel_subgroups(self.ell, self.seed)
        return self._kernels

    def subgroup_abscissa_sum(self, gen):
        acc = self.field.zero
        for Q in self.curve.subgroup(gen, self.ell):
            acc += Q[0]
        return acc

    def match_kernel(self, m):
        """Generator of the kernel whose invariants agree with the root m."""
        F, a, b = self.field, self.curve.a, self.curve.b
        disc = -16 * (4 * a**3 + 27 * b * b)
        e4, e6 = -48 * a, 864 * b
        targets = [_eval_aux(aux_representation(self.ell, name, self.modpoly), self.modpoly, F, self.j, m)
                   for name in AUX_NAMES]
        candidates = []
        for gen in self.kernels():
            s = self.subgroup_abscissa_sum(gen)
            values = (s**6 / disc, s**4 * e4 / disc, s**3 * e6 / disc)
            if all(x == y for x, y in zip(values, targets)):
                candidates.append(gen)
        if len(candidates) != 1:
            raise VerificationError(f"root matched {len(candidates)} kernels, expected exactly one")
        return candidates[0]


def gauss_sum_at(ctx: WorkingContext, gen, n: int, power: int = 1):
    """G_{chi^power}(E, gen) = sum_a chi^power(a) V(a * gen), V = x for odd n, y for even n."""
    zeta = ctx.field.nth_root_of_unity(n)
    chi = Character(ctx.ell, n, power % n)
    use_y = n % 2 == 0
    acc = ctx.field.zero
    pt = gen
    for a in range(1, ctx.ell):
        acc += zeta ** chi.exponent(a) * (pt[1] if use_y else pt[0])
        pt = ctx.curve.add(pt, gen)
    return acc


class GammaProvider(Protocol):
    def gamma(self, ctx: WorkingContext, m, n: int, power: int): ...

    def aux_product(self, ctx: WorkingContext, m, n: int, power: int, mult: int): ...


class TorsionGaussOracle:
    """Computes G_{chi^power}(E, P) from explicit points P of the kernel for m."""

    def __init__(self):
        self._gens: dict = {}

    def gauss_sum(self, ctx: WorkingContext, m, n: int, power: int):
        key = (id(ctx), ctx.field.key(m))
        if key not in self._gens:
            self._gens[key] = ctx.match_kernel(m)
        return gauss_sum_at(ctx, self._gens[key], n, power)

    def gamma(self, ctx, m, n, power=1):
        return self.gauss_sum(ctx, m, n, power) ** n

    def aux_product(self, ctx, m, n, power, mult):
        return self.gauss_sum(ctx, m, n, power) ** mult * self.gauss_sum(ctx, m, n, -1)


class RecordedGammaProvider:
    """Replays provider answers stored in a JSON file, keyed by instance and root."""

    def __init__(self, records: dict):
        self.records = records

    @staticmethod
    def _key(ctx: WorkingContext, m, n, kind, power, mult=0) -> str:
        i = ctx.inst
        return json.dumps([i.p, i.a, i.b, ctx.ell, ctx.field.degree, n, kind, power % n, mult, ctx.field.encode(m)])

    @classmethod
    def load(cls, path) -> "RecordedGammaProvider":
        return cls(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.records, sort_keys=True, indent=0))

    @classmethod
    def record(cls, source: GammaProvider) -> "RecordingProxy":
        return RecordingProxy(source)

    def _lookup(self, key, ctx):
        if key not in self.records:
            raise VerificationError("no recorded Gamma value for this query")
        return ctx.field(self.records[key])

    def gamma(self, ctx, m, n, power=1):
        return self._lookup(self._key(ctx, m, n, "gamma", power), ctx)

    def aux_product(self, ctx, m, n, power, mult):
        return self._lookup(self._key(ctx, m, n, "aux", power, mult), ctx)


class RecordingProxy:
    def __init__(self, source):
        self.source = source
        self.records: dict[str, list[int]] = {}

    def gamma(self, ctx, m, n, power=1):
        val = self.source.gamma(ctx, m, n, power)
        self.records[RecordedGammaProvider._key(ctx, m, n, "gamma", power)] = ctx.field.encode(val)
        return val

    def aux_product(self, ctx, m, n, power, mult):
        val = self.source.aux_product(ctx, m, n, power, mult)
        self.records[RecordedGammaProvider._key(ctx, m, n, "aux", power, mult)] = ctx.field.encode(val)
        return val

    def provider(self) -> RecordedGammaProvider:
        return RecordedGammaProvider(dict(self.records))


@dataclass
class IndexResult:
    n: int
    e: int
    path: str
    mults: int


def evaluate_in_field(ctx: WorkingContext, rep: RationalRepresentation, m, m2, counter: MulCounter | None = None):
    F = ctx.field
    zeta = F.nth_root_of_unity(rep.n)
    conv = coefficient_map(F, zeta, rep.n)
    key = ("nested", id(rep), F.degree)
    cache = ctx.__dict__.setdefault("_nested", {})
    if key not in cache:
        cache[key] = specialize_tensor(rep, conv, F.zero)
    return evaluate(rep, ctx.modpoly, ctx.j, m, m2, convert=conv, zero=F.zero, one=F.one,
                    counter=counter, nested=cache[key])


def trace_index(ctx: WorkingContext, rep: RationalRepresentation, m, provider: GammaProvider) -> IndexResult:
    """e = ind_g(t) mod n from the root m (any root of M_ell(X, j) in the field)."""
    n, p, F = rep.n, ctx.p, ctx.field
    if rep.is_zero:
        raise VerificationError(f"representation for n = {n} is identically zero")
    m1, m2 = F.frobenius(m, 1), F.frobenius(m, 2)
    if m1 == m or m2 == m:
        raise NotAtkinError("the root is fixed by Frobenius or its square; r must exceed 2")
    counter = MulCounter()
    r1 = evaluate_in_field(ctx, rep, m, m1, counter)
    r2 = evaluate_in_field(ctx, rep, m, m2, counter)
    if r2 == F.zero:
        raise VerificationError("R(j, m, m^(p^2)) vanishes")
    ratio = r1 / r2
    if p % n == 1:
        gamma = provider.gamma(ctx, m, n, 1)
        val = ratio * gamma ** ((p * p - p) // n)
        path = "primary"
    else:
        pinv = pow(p, -1, n)
        q1, r_1 = divmod(p, n)
        q2, r_2 = divmod(p * p, n)
        g1 = provider.gamma(ctx, m, n, pinv)
        g2 = provider.gamma(ctx, m, n, pinv * pinv)
        j1 = provider.aux_product(ctx, m, n, pinv, r_1)
        j2 = provider.aux_product(ctx, m, n, pinv * pinv, r_2)
        val = ratio * (g2**q2 * j2) / (g1**q1 * j1)
        path = "general"
    if val**n != F.one:
        raise VerificationError("combined value is not an n-th root of unity")
    zeta = F.nth_root_of_unity(n)
    e = (-F.discrete_log_mu(val, zeta, n)) % n
    return IndexResult(n, e, path, counter.count)


@dataclass
class TraceResult:
    ell: int
    r: int
    indices: list[IndexResult] = field(default_factory=list)
    t_mod_ell: int = 0
    field_degree: int = 1

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "r": self.r,
            "indices": [{"n": x.n, "e": x.e} for x in self.indices],
            "t_mod_ell": self.t_mod_ell,
        }


def crt(residues: list[tuple[int, int]]) -> tuple[int, int]:
    """Combine (value, modulus) pairs with pairwise coprime moduli."""
    x, mod = 0, 1
    for r, n in residues:
        if gcd(mod, n) != 1:
            raise ValueError("CRT moduli must be coprime")
        k = ((r - x) * pow(mod, -1, n)) % n
        x, mod = x + mod * k, mod * n
    return x % mod, mod


def default_index_moduli(ell: int) -> list[int]:
    """Prime-power divisors of ell - 1; their lcm is ell - 1."""
    out, k = [], ell - 1
    q = 2
    while q <= k:
        if k % q == 0:
            pe = 1
            while k % q == 0:
                pe *= q
                k //= q
            out.append(pe)
        q += 1
    return out


def working_degree(inst: CurveInstance, ell: int, r: int, ns: list[int]) -> int:
    """Smallest M so that F_{p^M} holds the roots, zeta_n and the x-coordinates of E[ell]."""
    curve = inst.curve()
    xdeg = lcm(1, *curve.torsion_x_degrees(ell))
    return lcm(r, xdeg, *(multiplicative_order(inst.p, n) for n in ns))


def trace_mod_ell(inst: CurveInstance, ell: int, reps: dict[int, RationalRepresentation], modpoly: ModularPolynomial,
                  provider: GammaProvider | None = None, seed: int = 0, root_index: int = 0) -> TraceResult:
    inst.validate(ell)
    if is_supersingular(inst.p, inst.a, inst.b):
        raise DegenerateInputError("supersingular curve")
    cls = classify(inst, ell, modpoly)
    if cls.kind != "Atkin":
        raise NotAtkinError(f"ell = {ell} is {cls.kind} for this curve")
    if cls.r == 2:
        return TraceResult(ell, 2, [], 0)
    ns = sorted(reps)
    if lcm(1, *ns) != ell - 1:
        raise NotAtkinError(f"representations for n in {ns} do not cover ell - 1 = {ell - 1}")
    degree = working_degree(inst, ell, cls.r, ns)
    provider = provider or TorsionGaussOracle()
    try:
        ctx = WorkingContext(inst, ell, modpoly, degree, seed)
        ctx.kernels()
    except ValueError:
        degree *= 2
        ctx = WorkingContext(inst, ell, modpoly, degree, seed)
    roots = ctx.isogeny_roots()
    m = roots[root_index % len(roots)]
    result = TraceResult(ell, cls.r, field_degree=degree)
    for n in ns:
        result.indices.append(trace_index(ctx, reps[n], m, provider))
    e, _ = crt([(x.e, x.n) for x in result.indices])
    t = pow(smallest_primitive_root(ell), e, ell)
    if legendre(t * t - 4 * inst.p, ell) != -1:
        raise VerificationError(f"t = {t} mod {ell} contradicts the Atkin condition")
    result.t_mod_ell = t
    return result


# instance search


def frobenius_order_mod_ell(p: int, t: int, ell: int) -> int:
    """Order of a matrix with characteristic polynomial x^2 - t x + p over F_ell."""
    mat = ((0, (-p) % ell), (1, t % ell))
    cur, k = mat, 1
    ident = ((1, 0), (0, 1))
    while cur != ident:
        cur = tuple(tuple(sum(cur[i][l] * mat[l][c] for l in range(2)) % ell for c in range(2)) for i in range(2))
        k += 1
    return k


def primes_between(lo: int, hi: int) -> list[int]:
    return [q for q in range(max(lo, 5), hi) if is_prime(q)]


@dataclass(frozen=True)
class SearchHit:
    inst: CurveInstance
    r: int
    t: int
    degree: int


def search_instances(ell: int, modpoly: ModularPolynomial, *, want: int, primes, coeff_range=range(1, 12),
                     accept=lambda hit: True, max_degree: int = 60) -> list[SearchHit]:
    """First ``want`` Atkin instances (ordered by p, a, b) satisfying ``accept``.

    Brute-force t is used only to estimate the field degree cheaply.
    """
    from .curves import brute_force_count

    hits: list[SearchHit] = []
    for p in primes:
        if p == ell:
            continue
        seen = set()
        for a in coeff_range:
            for b in coeff_range:
                inst = CurveInstance(p, a % p, b % p)
                if inst in seen:
                    continue
                seen.add(inst)
                try:
                    inst.validate(ell)
                except DegenerateInputError:
                    continue
                if is_supersingular(p, inst.a, inst.b):
                    continue
                cls = classify(inst, ell, modpoly)
                if cls.kind != "Atkin":
                    continue
                _, t = brute_force_count(p, inst.a, inst.b)
                deg = frobenius_order_mod_ell(p, t, ell)
                hit = SearchHit(inst, cls.r, t, deg)
                if deg <= max_degree and accept(hit):
                    hits.append(hit)
                    if len(hits) >= want:
                        return hits
    return hits
