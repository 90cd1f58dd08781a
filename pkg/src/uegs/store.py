"""Artifact files, canonical JSON and run configuration.

``.cmp`` holds a modular polynomial, ``.uegs`` a rational representation.
Both are canonical JSON (sorted keys, no insignificant whitespace), so equal
content gives byte-identical files and a stable content hash.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .cyclotomic import CycRat, rat_from_str, rat_to_str
from .modpoly import ModularPolynomial, ModpolyError
from .representation import RationalRepresentation

CMP_FORMAT = "cmp/1"
UEGS_FORMAT = "uegs/1"


class FormatError(ValueError):
    """A file failed schema or invariant validation."""


class MissingArtifactError(FileNotFoundError):
    pass


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode() + b"\n"


def write_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_bytes(path: str | os.PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise MissingArtifactError(f"missing artifact file {path}") from exc


# modular polynomials


def _coeff_to_str(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else rat_to_str(c)


def _coeff_from_str(s: str):
    return rat_from_str(s) if "/" in s else int(s)


def modpoly_to_json(poly: ModularPolynomial) -> dict:
    return {
        "format": CMP_FORMAT,
        "ell": poly.ell,
        "v": poly.v,
        "terms": [[i, k, _coeff_to_str(c)] for i, k, c in poly.terms],
    }


def dumps_modpoly(poly: ModularPolynomial) -> bytes:
    return canonical_json(modpoly_to_json(poly))


def loads_modpoly(data: bytes | str) -> ModularPolynomial:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    if obj.get("format") != CMP_FORMAT:
        raise FormatError(f"expected format {CMP_FORMAT}, got {obj.get('format')!r}")
    if set(obj) != {"format", "ell", "v", "terms"}:
        raise FormatError(f"unexpected keys {sorted(obj)}")
    terms = [(int(i), int(k), _coeff_from_str(c)) for i, k, c in obj["terms"]]
    order = sorted(terms, key=lambda t: (-t[0], -t[1]))
    if terms != order or len({(i, k) for i, k, _ in terms}) != len(terms):
        raise FormatError("terms must be unique and ordered by X-exponent then Y-exponent, descending")
    if any(c == 0 for _, _, c in terms):
        raise FormatError("zero coefficients must not be stored")
    try:
        return ModularPolynomial(tuple(terms), ell=int(obj["ell"]), v=int(obj["v"]))
    except ModpolyError as exc:
        raise FormatError(str(exc)) from exc


def modpoly_hash(poly: ModularPolynomial) -> str:
    return "sha256:" + hashlib.sha256(dumps_modpoly(poly)).hexdigest()


# representations


def representation_to_json(rep: RationalRepresentation) -> dict:
    return {
        "format": UEGS_FORMAT,
        "ell": rep.ell,
        "n": rep.n,
        "g": rep.g,
        "xi": rep.xi,
        "v": rep.v,
        "prec": rep.prec,
        "modpoly_hash": rep.modpoly_hash,
        "tensor": [[i1, i2, i3, c.to_json()] for (i1, i2, i3), c in sorted(rep.tensor.items())],
    }


def dumps_representation(rep: RationalRepresentation) -> bytes:
    return canonical_json(representation_to_json(rep))


def loads_representation(data: bytes | str, modpoly: ModularPolynomial | None = None) -> RationalRepresentation:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    if obj.get("format") != UEGS_FORMAT:
        raise FormatError(f"expected format {UEGS_FORMAT}, got {obj.get('format')!r}")
    keys = {"format", "ell", "n", "g", "xi", "v", "prec", "modpoly_hash", "tensor"}
    if set(obj) != keys:
        raise FormatError(f"unexpected keys {sorted(set(obj) ^ keys)}")
    ell, n, v = int(obj["ell"]), int(obj["n"]), int(obj["v"])
    if obj["xi"] not in (1, -1):
        raise FormatError("xi must be +1 or -1")
    rep = RationalRepresentation(ell, n, int(obj["g"]), int(obj["xi"]), v, int(obj["prec"]), obj["modpoly_hash"])
    last = None
    bound = (ell * ell + ell) * v - 1
    for row in obj["tensor"]:
        i1, i2, i3, raw = row
        idx = (int(i1), int(i2), int(i3))
        if last is not None and idx <= last:
            raise FormatError("tensor entries must be unique and sorted")
        last = idx
        if not (0 <= idx[0] < ell and 0 <= idx[2] < v and idx[1] >= 0 and idx[1] * v + ell * idx[2] <= bound):
            raise FormatError(f"tensor index {idx} outside the admissible range")
        try:
            c = CycRat.from_json(raw)
        except (ValueError, KeyError) as exc:
            raise FormatError(f"bad coefficient at {idx}: {exc}") from exc
        if c.m != n:
            raise FormatError(f"coefficient at {idx} lives in Q(zeta_{c.m}), expected Q(zeta_{n})")
        rep.tensor[idx] = c
    if modpoly is not None:
        check_modpoly_hash(rep, modpoly)
    return rep


def check_modpoly_hash(rep: RationalRepresentation, modpoly: ModularPolynomial) -> None:
    if modpoly.ell != rep.ell:
        raise FormatError(f"representation is for ell={rep.ell}, modular polynomial for ell={modpoly.ell}")
    if rep.modpoly_hash != modpoly_hash(modpoly):
        raise FormatError("representation was built against a different modular polynomial")


# file naming and the packaged artifacts


def modpoly_filename(ell: int) -> str:
    return f"modpoly_{ell}.cmp"


def representation_filename(ell: int, n: int) -> str:
    return f"uegs_{ell}_{n}.uegs"


def packaged_data_dir() -> Path:
    return Path(str(resources.files("uegs") / "data"))


def load_modpoly_file(path) -> ModularPolynomial:
    return loads_modpoly(read_bytes(path))


def load_representation_file(path, modpoly: ModularPolynomial | None = None) -> RationalRepresentation:
    return loads_representation(read_bytes(path), modpoly)


# run configuration


DEFAULT_SEED = 0xC0FFEE


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    margin: int = 16
    eps: int = 1
    jobs: int = 1
    reps_dir: Path = field(default_factory=packaged_data_dir)

    @classmethod
    def from_env(cls, env=None, **overrides) -> "RunConfig":
        """Environment (SEED, JOBS) first, then explicit overrides that are not None."""
        env = os.environ if env is None else env
        cfg = cls()
        if "SEED" in env:
            cfg = replace(cfg, seed=int(env["SEED"], 0))
        if "JOBS" in env:
            cfg = replace(cfg, jobs=int(env["JOBS"]))
        given = {k: v for k, v in overrides.items() if v is not None}
        if "reps_dir" in given:
            given["reps_dir"] = Path(given["reps_dir"])
        cfg = replace(cfg, **given)
        if cfg.eps not in (1, -1):
            raise ValueError("xi exponent must be +1 or -1")
        if cfg.jobs < 1 or cfg.margin < 0:
            raise ValueError("jobs must be positive and margin non-negative")
        return cfg
