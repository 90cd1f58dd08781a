"""Command-line entry point.

Results go to stdout as one JSON object, logs to stderr.  Exit codes:
0 ok, 2 degenerate input, 3 not Atkin or unsupported r, 4 precision or
verification failure, 5 missing artifact file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .curves import brute_force_count
from .gauss import is_prime
from .modpoly import ModpolyError, build_canonical_modpoly, required_precision, residual
from .pipeline import (
    CurveInstance,
    DegenerateInputError,
    PipelineError,
    classify,
    default_index_moduli,
    trace_mod_ell,
)
from .representation import RepresentationError, RepresentationPlan, build_representation, rebuild_a0_slice, verify_identity
from .store import (
    FormatError,
    MissingArtifactError,
    RunConfig,
    dumps_modpoly,
    dumps_representation,
    load_modpoly_file,
    load_representation_file,
    modpoly_filename,
    modpoly_hash,
    packaged_data_dir,
    representation_filename,
    write_atomic,
)

log = logging.getLogger("uegs")

EXIT_OK, EXIT_DEGENERATE, EXIT_NOT_ATKIN, EXIT_VERIFY, EXIT_MISSING = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, reason: str):
        super().__init__(reason)
        self.code, self.reason = code, reason


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _config(args) -> RunConfig:
    try:
        return RunConfig.from_env(seed=getattr(args, "seed", None), jobs=getattr(args, "jobs", None),
                                  margin=getattr(args, "margin", None), eps=getattr(args, "xi", None),
                                  reps_dir=getattr(args, "reps", None))
    except ValueError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc)) from exc


def _find_modpoly(ell: int, explicit: str | None, near: Path | None, cfg: RunConfig):
    """Explicit file, then a file next to ``near``, then the reps directory, then packaged data."""
    if explicit:
        return load_modpoly_file(explicit)
    for folder in (near, cfg.reps_dir, packaged_data_dir()):
        if folder is not None and (Path(folder) / modpoly_filename(ell)).exists():
            return load_modpoly_file(Path(folder) / modpoly_filename(ell))
    raise MissingArtifactError(f"no {modpoly_filename(ell)} found; run 'uegs modpoly --ell {ell}' first")


def _instance(args) -> CurveInstance:
    if not is_prime(args.p) or args.p <= 3:
        raise DegenerateInputError(f"p = {args.p} must be a prime > 3")
    inst = CurveInstance(args.p, args.a % args.p, args.b % args.p)
    inst.validate(getattr(args, "ell", None))
    return inst


# subcommands


def cmd_modpoly(args) -> None:
    poly = build_canonical_modpoly(args.ell)
    check = required_precision(args.ell) + 10
    if not residual(poly, check).is_zero():
        raise CliError(EXIT_VERIFY, f"M_{args.ell}(m_ell, j) does not vanish at precision {check}")
    out = Path(args.output or modpoly_filename(args.ell))
    write_atomic(out, dumps_modpoly(poly))
    _emit({"ell": args.ell, "v": poly.v, "terms": len(poly.terms), "hash": modpoly_hash(poly), "path": str(out)})


def cmd_precompute(args) -> None:
    cfg = _config(args)
    poly = _find_modpoly(args.ell, args.modpoly, None, cfg)
    plan = RepresentationPlan(args.ell, args.n, cfg.eps, cfg.margin)
    timings: dict[str, float] = {}
    rep = build_representation(plan, poly, modpoly_hash(poly), timings)
    verify_identity(rep, poly, cfg.margin)
    out = Path(args.output or representation_filename(args.ell, args.n))
    write_atomic(out, dumps_representation(rep))
    _emit({"ell": rep.ell, "n": rep.n, "prec": rep.prec, "entries": len(rep.tensor), "path": str(out),
           "timings": {k: round(v, 4) for k, v in timings.items()}})


def cmd_verify(args) -> None:
    cfg = _config(args)
    path = Path(args.file)
    try:
        ell = int(json.loads(load_bytes_or_missing(path))["ell"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{path} is not a representation file") from exc
    poly = _find_modpoly(ell, args.modpoly, path.parent, cfg)
    rep = load_representation_file(path, poly)
    checked = []
    for k in args.conjugates:
        verify_identity(rep, poly, cfg.margin, conjugate=k)
        checked.append(k)
    if args.check_a0_slice and not rep.is_zero:
        if rebuild_a0_slice(rep, poly) != rep.slice(0):
            raise CliError(EXIT_VERIFY, "a_0 slice differs from its reduced-precision rebuild")
    _emit({"status": "ok", "ell": rep.ell, "n": rep.n, "conjugates": checked, "margin": cfg.margin})


def load_bytes_or_missing(path: Path) -> bytes:
    if not path.exists():
        raise MissingArtifactError(f"missing artifact file {path}")
    try:
        return path.read_bytes()
    except OSError as exc:
        raise MissingArtifactError(str(exc)) from exc


def cmd_classify(args) -> None:
    cfg = _config(args)
    inst = _instance(args)
    poly = _find_modpoly(args.ell, args.modpoly, None, cfg)
    res = classify(inst, args.ell, poly)
    _emit({"ell": args.ell, "kind": res.kind, "r": res.r, "degrees": list(res.degrees)})


def cmd_trace(args) -> None:
    cfg = _config(args)
    inst = _instance(args)
    folder = cfg.reps_dir
    poly = _find_modpoly(args.ell, args.modpoly, folder, cfg)
    reps = {}
    for n in default_index_moduli(args.ell):
        reps[n] = load_representation_file(Path(folder) / representation_filename(args.ell, n), poly)
    res = trace_mod_ell(inst, args.ell, reps, poly, seed=cfg.seed)
    _emit(res.to_json())


def cmd_count(args) -> None:
    if not is_prime(args.p) or args.p <= 3:
        raise DegenerateInputError(f"p = {args.p} must be a prime > 3")
    inst = CurveInstance(args.p, args.a % args.p, args.b % args.p)
    inst.curve()
    points, t = brute_force_count(inst.p, inst.a, inst.b)
    _emit({"p": inst.p, "a": inst.a, "b": inst.b, "points": points, "t": t})


def cmd_bench(args) -> None:
    cfg = _config(args)
    ells = tuple(int(x) for x in args.ells.split(","))
    report = bench_mod.run_bench(ells, cfg.reps_dir, cfg.jobs, timings=args.timings)
    _emit(report.to_json())


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uegs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, reps=True):
        p.add_argument("--seed", type=lambda s: int(s, 0), help="seed for randomized root finding")
        p.add_argument("--jobs", type=int, help="worker processes")
        if reps:
            p.add_argument("--reps", help="directory holding .cmp and .uegs files (default: packaged data)")
        p.add_argument("--modpoly", help="explicit .cmp file")

    def add_curve(p, ell=True):
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--a", type=int, required=True)
        p.add_argument("--b", type=int, required=True)
        if ell:
            p.add_argument("--ell", type=int, required=True)

    p = sub.add_parser("modpoly", help="build and write the canonical modular polynomial")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_modpoly)

    p = sub.add_parser("precompute", help="build, verify and write a rational representation")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--margin", type=int)
    p.add_argument("--xi", type=int, choices=(1, -1), help="xi = zeta_ell^(+-1)")
    add_common(p)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("verify", help="recheck a .uegs file against fresh q-expansions")
    p.add_argument("file")
    p.add_argument("--margin", type=int)
    p.add_argument("--conjugates", type=lambda s: [int(x) for x in s.split(",")], default=[0, 1],
                   help="comma-separated k for the conjugate identities (default 0,1)")
    p.add_argument("--check-a0-slice", action="store_true", help="also rebuild the i1 = 0 slice from a_0 alone")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="Elkies / Atkin / special and the factor degree r")
    add_curve(p)
    add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("trace", help="t mod ell for an Atkin prime ell")
    add_curve(p)
    add_common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("count", help="#E(F_p) and t by enumeration")
    add_curve(p, ell=False)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bench", help="multiplication counts of the evaluation step")
    p.add_argument("--ells", default="5,7,13")
    p.add_argument("--timings", action="store_true", help="also time the precompute stages")
    add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
        return EXIT_OK
    except CliError as exc:
        code, reason = exc.code, exc.reason
    except PipelineError as exc:
        code, reason = exc.exit_code, exc.reason
    except MissingArtifactError as exc:
        code, reason = EXIT_MISSING, str(exc)
    except (FormatError, RepresentationError, ModpolyError) as exc:
        code, reason = EXIT_VERIFY, str(exc)
    except ValueError as exc:
        code, reason = EXIT_DEGENERATE, str(exc)
    log.error("%s", reason)
    _emit({"status": "error", "reason": reason})
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
