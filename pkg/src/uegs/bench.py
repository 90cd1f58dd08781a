"""Multiplication counts of the evaluation step and precompute timings.

Counts come from the ``MulCounter`` hook of :func:`uegs.representation.evaluate`
run over a prime field.  The exponent of ell is fitted by least squares on
log(count) against log(ell).
"""

from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .finite_fields import FiniteField
from .modpoly import ModularPolynomial, canonical_modpoly
from .pipeline import coefficient_map, default_index_moduli
from .representation import (
    MulCounter,
    RationalRepresentation,
    RepresentationPlan,
    build_representation,
    evaluate,
    verify_identity,
)
from .store import (
    MissingArtifactError,
    load_modpoly_file,
    load_representation_file,
    modpoly_filename,
    modpoly_hash,
    representation_filename,
)

BENCH_PRIME = 10009  # 10008 = 2^3 * 3^2 * 139, so mu_n lies in F_p for every n used here
BENCH_POINT = (1234, 77, 999)  # (j, m, m') in F_p; any point off the denominator's zero set works


def bench_modulus(ell: int) -> int:
    """The n whose representation is timed: the largest prime-power divisor of ell - 1."""
    return max(default_index_moduli(ell))


@dataclass
class CountRecord:
    ell: int
    n: int
    v: int
    count: int
    tensor_entries: int
    slot_model: int  # ell * (ell^2 + ell + 1) * v, the tensor shape allowed by the index bound


@dataclass
class BenchReport:
    records: list[CountRecord]
    exponent: float
    ratio_13_5: float | None
    ratio_in_band: bool | None
    timings: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "counts": [asdict(r) for r in self.records],
            "exponent": round(self.exponent, 4),
            "ratio_13_5": None if self.ratio_13_5 is None else round(self.ratio_13_5, 4),
            "ratio_in_band": self.ratio_in_band,
            "timings": self.timings,
        }


def load_or_build(ell: int, n: int, reps_dir: Path | None) -> tuple[ModularPolynomial, RationalRepresentation]:
    """Packaged or on-disk artifacts when present, otherwise a fresh build."""
    if reps_dir is not None:
        try:
            poly = load_modpoly_file(Path(reps_dir) / modpoly_filename(ell))
            rep = load_representation_file(Path(reps_dir) / representation_filename(ell, n), poly)
            return poly, rep
        except MissingArtifactError:
            pass
    poly = canonical_modpoly(ell)
    return poly, build_representation(RepresentationPlan(ell, n), poly, modpoly_hash(poly))


def count_multiplications(rep: RationalRepresentation, poly: ModularPolynomial, p: int = BENCH_PRIME) -> int:
    field_ = FiniteField(p, 1)
    conv = coefficient_map(field_, field_.nth_root_of_unity(rep.n), rep.n)
    j, m, m2 = (field_(x) for x in BENCH_POINT)
    counter = MulCounter()
    evaluate(rep, poly, j, m, m2, convert=conv, zero=field_.zero, one=field_.one, counter=counter)
    return counter.count


def _count_one(args) -> CountRecord:
    ell, reps_dir = args
    n = bench_modulus(ell)
    poly, rep = load_or_build(ell, n, reps_dir)
    return CountRecord(ell, n, rep.v, count_multiplications(rep, poly), len(rep.tensor),
                       ell * (ell * ell + ell + 1) * rep.v)


def fit_exponent(ells, counts) -> float:
    xs = [math.log(x) for x in ells]
    ys = [math.log(c) for c in counts]
    return statistics.linear_regression(xs, ys).slope


def cubic_ratio(records: list[CountRecord], small: int = 5, large: int = 13) -> float | None:
    """count(large)/count(small) divided by the model ratio (large/small)^3 * v_large/v_small."""
    by_ell = {r.ell: r for r in records}
    if small not in by_ell or large not in by_ell:
        return None
    a, b = by_ell[small], by_ell[large]
    model = (large / small) ** 3 * b.v / a.v
    return (b.count / a.count) / model


def precompute_timings(ell: int, n: int, margin: int = 16) -> dict[str, float]:
    poly = canonical_modpoly(ell)
    stages: dict[str, float] = {}
    t0 = time.perf_counter()
    rep = build_representation(RepresentationPlan(ell, n, margin=margin), poly, modpoly_hash(poly), stages)
    t1 = time.perf_counter()
    verify_identity(rep, poly, margin)
    t2 = time.perf_counter()
    stages.update(build=t1 - t0, verify=t2 - t1)
    return {k: round(v, 4) for k, v in stages.items()}


def run_bench(ells=(5, 7, 13), reps_dir: Path | None = None, jobs: int = 1, timings: bool = False) -> BenchReport:
    tasks = [(ell, reps_dir) for ell in ells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_count_one, tasks))
    else:
        records = [_count_one(t) for t in tasks]
    exponent = fit_exponent([r.ell for r in records], [r.count for r in records])
    ratio = cubic_ratio(records)
    report = BenchReport(records, exponent, ratio, None if ratio is None else 1 / 3 <= ratio <= 3)
    if timings:
        report.timings = {f"{r.ell},{r.n}": precompute_timings(r.ell, r.n) for r in records}
    return report
