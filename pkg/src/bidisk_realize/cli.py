"""Command-line front end.

Exit codes: 0 on success or a passing check, 1 when a verification fails or
a computation does not converge, 2 on unusable input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import BidiskError, InputError, StageError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class JobSpec:
    command: str
    input: Optional[Path]
    out: Optional[Path]
    tol: float
    seed: int
    grid: int
    exact: bool


# ---------------------------------------------------------------------------
# file helpers
# ---------------------------------------------------------------------------

def _read_json(path) -> dict:
    if path is None:
        raise InputError("missing input file")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc


def _load_function(path, exact: bool = False):
    """A function file: a MatPoly object, ``{"num", "den"}``, or an example bundle with ``"S"``."""
    from .poly import RationalMatrixFunction

    obj = _read_json(path)
    if isinstance(obj, dict) and "S" in obj and "terms" not in obj:
        obj = obj["S"]
    S = RationalMatrixFunction.from_json_obj(obj)
    if exact and not S.exact:
        S = RationalMatrixFunction(S.num.to_exact(), S.den.to_exact(), S.lowest_terms)
    return S


def _load_matpoly(path, exact: bool = False):
    from .poly import MatPoly

    obj = _read_json(path)
    P = MatPoly.from_json_obj(obj)
    return P.to_exact() if exact and not P.exact else P


def _load_tfr(path):
    from .realize1 import TransferRealization

    obj = _read_json(path)
    if "realization" in obj:
        obj = obj["realization"]
    return TransferRealization.from_json_obj(obj)


def _load_dec(path):
    from .agler import AglerDecomposition

    obj = _read_json(path)
    if "decomposition" in obj:
        obj = obj["decomposition"]
    return AglerDecomposition.from_json_obj(obj)


def _report(rep) -> dict:
    # elapsed time is dropped so that output depends only on input and flags
    out = rep.to_json_obj()
    out.pop("elapsed", None)
    return out


def _emit(obj, job: JobSpec):
    text = json.dumps(obj, indent=1, sort_keys=False) + "\n"
    if job.out is not None:
        job.out.write_text(text)
    else:
        sys.stdout.write(text)


def _matrix_json(m) -> list:
    from .poly import _matrix_to_json, is_exact_array

    m = np.atleast_2d(m)
    if is_exact_array(m):
        return _matrix_to_json(m)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _strip_elapsed(d: dict) -> dict:
    return {k: v for k, v in d.items() if not k.startswith("elapsed")}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_realize(args, job):
    from .kummert import realize_isoinner_2d
    from .realize1 import realize_isoinner_1d
    from .verify import verify_realization

    S = _load_function(args.input, job.exact)
    if S.nvars == 1:
        R, F = realize_isoinner_1d(S.num, S.den)
        cert = {"F": F.to_json_obj()}
    else:
        R, c = realize_isoinner_2d(S, grid=job.grid)
        cert = c.to_json_obj()
        cert["residuals"] = _strip_elapsed(cert["residuals"])
    rep = verify_realization(S, R, grid=job.grid, tol=job.tol)
    _emit({"realization": R.to_json_obj(), "certificate": cert, "verification": _report(rep)}, job)
    return rep.passed


def cmd_realize_contractive(args, job):
    from .kummert import realize_contractive_2d_strict
    from .realize1 import realize_contractive_1d
    from .verify import verify_realization

    S = _load_function(args.input, job.exact)
    out = {}
    if S.nvars == 1:
        R, _ = realize_contractive_1d(S.num, S.den)
    else:
        if not S.is_polynomial_den():
            raise InputError("the strict two-variable path takes polynomials")
        R, _, aug = realize_contractive_2d_strict(S.num * (1 / complex(S.den.to_float().coeff((0, 0))[0, 0])), grid=32)
        out["augmentation"] = {"delta": aug.delta, "delta_prime": aug.delta_prime, "A": aug.A.to_json_obj(),
                               "info": {k: v for k, v in aug.info.items() if k != "orders"}}
    rep = verify_realization(S, R, grid=job.grid, tol=job.tol)
    out = {"realization": R.to_json_obj(), **out, "verification": _report(rep)}
    _emit(out, job)
    return rep.passed


def cmd_fr(args, job):
    from .specfact import circle_residual, fejer_riesz

    T = _load_matpoly(args.input, job.exact)
    fr = fejer_riesz(T)
    res, scale = circle_residual(fr.A, T)
    passed = res <= job.tol * max(scale, 1e-300)
    _emit({"factor": fr.to_json_obj(), "residual": res, "pass": passed}, job)
    return passed


def cmd_sos2(args, job):
    from .sos2 import sos_factor_strict, torus_min_eigenvalue

    T = _load_matpoly(args.input, job.exact)
    delta = args.delta
    if delta is None:
        delta = torus_min_eigenvalue(T, job.grid) * (1 - 1e-6)
    A, info = sos_factor_strict(T, delta, grid=job.grid, tol=job.tol, return_info=True)
    info = {k: v for k, v in info.items() if k != "orders"}
    _emit({"A": A.to_json_obj(), "delta": delta, "info": info}, job)
    return True


def cmd_breakdown(args, job):
    from .kummert import minimal_breakdown

    S = _load_function(args.input, job.exact)
    b = list(minimal_breakdown(S))
    if job.out is not None:
        job.out.write_text(json.dumps(b) + "\n")
    else:
        print(json.dumps(b))
    return True


def cmd_decompose(args, job):
    from .agler import tfr_to_decomposition

    S = _load_function(args.fn, job.exact)
    R = _load_tfr(args.tfr)
    dec = tfr_to_decomposition(R, S)
    rep = dec.verify(S.num, tol=job.tol)
    _emit({"decomposition": dec.to_json_obj(), "verification": _report(rep)}, job)
    return rep.passed


def cmd_recompose(args, job):
    from .agler import decomposition_to_tfr
    from .poly import RationalMatrixFunction
    from .verify import verify_realization

    dec = _load_dec(args.dec)
    S = _load_function(args.fn, job.exact) if args.fn else None
    if S is None and dec.num is None:
        raise InputError("recompose needs --fn when the decomposition carries no numerator")
    R = decomposition_to_tfr(dec, S, seed=job.seed)
    fn = S if S is not None else RationalMatrixFunction(dec.num, dec.den)
    rep = verify_realization(fn, R, grid=job.grid, tol=job.tol)
    _emit({"realization": R.to_json_obj(), "verification": _report(rep)}, job)
    return rep.passed


def cmd_reflect(args, job):
    from .agler import reflect_decomposition

    dec = _load_dec(args.dec)
    S = _load_function(args.fn, job.exact) if args.fn else None
    out = reflect_decomposition(dec, S)
    rep = out.verify(tol=job.tol)
    _emit({"decomposition": out.to_json_obj(), "verification": _report(rep)}, job)
    return rep.passed


def cmd_trim(args, job):
    from .realize1 import trim

    R = _load_tfr(args.tfr)
    Rt = trim(R, tol=job.tol)
    _emit({"realization": Rt.to_json_obj(), "size_before": R.size, "size_after": Rt.size}, job)
    return True


def cmd_nilpotency(args, job):
    from .agler import nilpotency_check

    R = _load_tfr(args.tfr)
    v = nilpotency_check(R, tol=job.tol, seed=job.seed)
    _emit(v.to_json_obj(), job)
    return v.passed


def cmd_verify(args, job):
    from .poly import RationalMatrixFunction
    from .verify import verify_isoinner, verify_realization

    if args.fn is None:
        raise InputError("verify needs --fn")
    S = _load_function(args.fn, job.exact)
    reports = []
    if args.tfr:
        reports.append(verify_realization(S, _load_tfr(args.tfr), grid=job.grid, tol=job.tol))
    if args.dec:
        reports.append(_load_dec(args.dec).verify(S.num, tol=job.tol))
    if not reports:
        reports.append(verify_isoinner(RationalMatrixFunction(S.num, S.den, S.lowest_terms), m=job.grid, tol=job.tol))
    passed = all(r.passed for r in reports)
    _emit({"reports": [_report(r) for r in reports], "pass": passed}, job)
    return passed


def cmd_example(args, job):
    from .fixtures import EXAMPLE_NAMES, kummert_example
    from .poly import MatPoly

    if args.name not in EXAMPLE_NAMES:
        raise InputError(f"unknown example {args.name!r}; available: {', '.join(EXAMPLE_NAMES)}")
    fx = kummert_example()
    out = {}
    for key in ("S", "T", "A", "B", "U", "Y", "C", "D", "F", "V"):
        v = fx[key]
        out[key] = v.to_json_obj() if isinstance(v, MatPoly) else _matrix_json(v)
    out["r"] = list(fx["r"])
    if args.part:
        if args.part not in out:
            raise InputError(f"unknown part {args.part!r}")
        if args.part == "V":
            from .realize1 import TransferRealization

            out = TransferRealization.from_colligation(fx["V"], 2, 2, 2, 2).to_json_obj()
        else:
            out = out[args.part]
    _emit(out, job)
    return True


COMMANDS = {
    "realize": cmd_realize,
    "realize-contractive": cmd_realize_contractive,
    "fr": cmd_fr,
    "sos2": cmd_sos2,
    "breakdown": cmd_breakdown,
    "decompose": cmd_decompose,
    "recompose": cmd_recompose,
    "reflect": cmd_reflect,
    "trim": cmd_trim,
    "nilpotency": cmd_nilpotency,
    "verify": cmd_verify,
    "example": cmd_example,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _positive(text):
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("grid must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=1e-8, help="verification tolerance")
    common.add_argument("--grid", type=_positive_int, default=12, help="grid points per variable")
    common.add_argument("--seed", type=int, default=11, help="seed for sampled constructions")
    common.add_argument("--exact", action="store_true", help="convert float input to exact rationals")
    common.add_argument("--out", type=Path, default=None, help="write JSON here instead of stdout")

    parser = argparse.ArgumentParser(prog="bidisk-realize", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, inputs=("input",)):
        p = sub.add_parser(name, parents=[common], help=help_text)
        for i in inputs:
            if i == "input":
                p.add_argument("input", help="JSON input file")
            else:
                p.add_argument(f"--{i}", default=None)
        return p

    add("realize", "isometric realization of an iso-inner function")
    add("realize-contractive", "contractive realization (one variable, or a strict two-variable polynomial)")
    add("fr", "matrix Fejér-Riesz factorization of a Laurent polynomial")
    p = add("sos2", "sum-of-squares factor of a strictly positive two-variable Laurent polynomial")
    p.add_argument("--delta", type=_positive, default=None, help="lower bound on the torus (default: sampled minimum)")
    add("breakdown", "minimal breakdown of a square inner function")
    add("decompose", "Agler decomposition from a realization", ("tfr", "fn"))
    add("recompose", "realization from an Agler decomposition", ("dec", "fn"))
    add("reflect", "reflect a decomposition to breve(S)", ("dec", "fn"))
    add("trim", "remove unreachable and unobservable states", ("tfr",))
    add("nilpotency", "check det(I - D Delta) == 1", ("tfr",))
    add("verify", "verify a realization, a decomposition or iso-innerness", ("tfr", "dec", "fn"))
    p = sub.add_parser("example", parents=[common], help="emit the worked example fixtures")
    p.add_argument("--name", required=True)
    p.add_argument("--part", default=None, help="emit a single fixture (S, T, A, B, U, Y, C, D, F, V)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    job = JobSpec(args.command, Path(args.input) if getattr(args, "input", None) else None,
                  args.out, args.tol, args.seed, args.grid, args.exact)
    try:
        passed = COMMANDS[args.command](args, job)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc.cause, InputError) else EXIT_FAIL
    except BidiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not passed:
        print("verification FAILED", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
