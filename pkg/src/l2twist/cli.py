"""Command-line front end.

Subcommands: mahler, fkdet, approx, torsion, degree, bounds, verify.
Inputs are JSON files against the schema in `serialize`; results go to
stdout or --output as JSON, curves and tables to --csv, and optional
figures to --plot.  Exit codes: 0 success, 2 invalid input, 3 verification
failure, 4 non-det-class point in a --strict torsion run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import serialize
from .grouprings import Character
from .mahler import (
    mahler,
    mahler_exact_univariate,
    mahler_lawton,
    mahler_quadrature,
)
from .polyparse import PolyParseError, parse_poly
from .quotients import approx_sequence, bound_certificate
from .torsion import (
    BasisChange,
    bound_envelope,
    degree as curve_degree,
    extension_complex,
    torsion_curve,
    validate_complex,
    verify_base_change,
    verify_duality,
    verify_product,
    verify_restriction,
    verify_scaling,
    verify_sum,
)
from .twisting import twist_scalar

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_VERIFY_FAILED = 3
EXIT_NON_DET_CLASS = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _diag(message: str, **detail):
    payload = {"error": message}
    payload.update(detail)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _load_input(path: str) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read input file: {e}")
    except json.JSONDecodeError as e:
        raise CliError(f"input is not valid JSON: {e}")
    if not isinstance(obj, dict):
        raise CliError("input must be a JSON object")
    return obj


def _emit(result: dict, args):
    text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_complex_and_character(obj: dict):
    if "complex" in obj:
        cx = serialize.complex_from_json(obj["complex"])
        phi_obj = obj.get("character")
    else:
        cx = serialize.complex_from_json(obj)
        phi_obj = obj.get("character")
    if phi_obj is not None:
        phi = serialize.character_from_json(phi_obj)
    else:
        # default: the all-ones real character on the generators
        ngen = cx.group.rank if cx.group.is_abelian else cx.group.generators
        phi = Character.real([1.0] * ngen)
    rep = validate_complex(cx)
    if not rep.ok:
        raise CliError(
            f"boundary composition is nonzero at degree {rep.degree}, "
            f"entry ({rep.row}, {rep.col})"
        )
    return cx, phi


def _load_matrix_job(obj: dict):
    group = serialize.group_from_json(obj.get("group"))
    A = serialize.matrix_from_json(obj.get("matrix"), group)
    return group, A


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_mahler(args) -> int:
    if args.poly:
        try:
            p = parse_poly(args.poly, nvars=args.nvars)
        except PolyParseError as e:
            raise CliError(f"bad polynomial string: {e}")
    elif args.input:
        obj = _load_input(args.input)
        p = serialize.poly_from_json(obj.get("poly"), nvars=args.nvars)
    else:
        raise CliError("mahler needs --poly or --input")
    if p.is_zero:
        raise CliError("the zero polynomial has no Mahler measure")
    if args.method == "exact":
        if p.nvars != 1:
            raise CliError("--method exact needs a univariate polynomial")
        res = mahler_exact_univariate(p)
    elif args.method == "lawton":
        res = mahler_lawton(p, tol=args.tol)
    elif args.method == "quadrature":
        res = mahler_quadrature(p, N=args.quadrature_n)
    else:
        res = mahler(p, tol=args.tol)
    _emit(
        {
            "value": res.value,
            "method": res.method,
            "error_estimate": res.error_estimate,
            "nvars": p.nvars,
        },
        args,
    )
    return EXIT_OK


def cmd_fkdet(args) -> int:
    from .mahler import det_matrix_over_Zd

    obj = _load_input(args.input)
    group, A = _load_matrix_job(obj)
    if not group.is_abelian:
        raise CliError("fkdet computes exact determinants over Z^d only; use approx")
    if A.rows != A.cols:
        raise CliError(f"fkdet needs a square matrix, got {A.rows}x{A.cols}")
    if "character" in obj and "t" in obj:
        phi = serialize.character_from_json(obj["character"])
        t = float(obj["t"])
        if t <= 0:
            raise CliError("twist parameter t must be positive")
        A = twist_scalar(A, phi, t)
    res = det_matrix_over_Zd(A, tol=args.tol)
    _emit(
        {
            "logdet": None if res.logdet.is_sentinel else res.logdet.value,
            "det_class": not res.logdet.is_sentinel,
            "method": res.logdet.method,
            "error_estimate": res.logdet.error_estimate,
        },
        args,
    )
    return EXIT_OK


def cmd_approx(args) -> int:
    obj = _load_input(args.input)
    group, A = _load_matrix_job(obj)
    if "tower" not in obj:
        raise CliError("approx needs a tower in the input")
    tower = serialize.tower_from_json(obj["tower"])
    twist = None
    if "character" in obj:
        phi = serialize.character_from_json(obj["character"])
        if "rep" in obj:
            twist = (phi, serialize.rep_from_json(obj["rep"]))
        elif "t" in obj:
            twist = (phi, float(obj["t"]))
    res = approx_sequence(A, tower, twist=twist, cutoff_factor=args.svd_cutoff_factor)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            serialize.write_approx_csv(res, fh)
    if args.plot:
        from .plotting import plot_approx

        plot_approx(res, args.plot)
    _emit(
        {
            "levels": [
                {"order": lv.order, "dim_ker": lv.vn_dim_ker, "logdet": lv.reg_logdet}
                for lv in res.levels
            ],
            "limsup_estimate": res.limsup_estimate,
            "dims_limit_estimate": res.dims_limit_estimate,
            "dims_stable": res.dims_stable,
        },
        args,
    )
    return EXIT_OK


def _compute_curve(args, with_envelope: bool = True):
    obj = _load_input(args.input)
    cx, phi = _load_complex_and_character(obj)
    if args.tmin <= 0 or args.tmax <= args.tmin:
        raise CliError("need 0 < tmin < tmax")
    curve = torsion_curve(cx, phi.as_real(), args.tmin, args.tmax, args.points, tol=args.tol)
    if with_envelope and cx.group.is_abelian:
        curve.envelope = bound_envelope(cx, phi.as_real())
    return curve


def cmd_torsion(args) -> int:
    curve = _compute_curve(args)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            serialize.write_curve_csv(curve, fh)
    if args.plot:
        from .plotting import plot_curve

        plot_curve(curve, args.plot)
    result = {
        "points": [
            {"t": p.t, "rho": p.rho, "status": p.status} for p in curve.points
        ],
    }
    if curve.envelope is not None:
        result["envelope"] = {"C": curve.envelope.C, "D": curve.envelope.D}
    _emit(result, args)
    if args.strict and not curve.ok():
        _diag("non-det-class point in strict torsion run")
        return EXIT_NON_DET_CLASS
    return EXIT_OK


def cmd_degree(args) -> int:
    curve = _compute_curve(args, with_envelope=False)
    if args.strict and not curve.ok():
        _diag("non-det-class point in strict torsion run")
        return EXIT_NON_DET_CLASS
    try:
        res = curve_degree(curve)
    except ValueError as e:
        raise CliError(str(e))
    _emit(
        {
            "degree": res.deg,
            "deg_zero": res.deg0,
            "deg_inf": res.degInf,
            "stable_zero": res.stable_zero,
            "stable_inf": res.stable_inf,
        },
        args,
    )
    return EXIT_OK


def cmd_bounds(args) -> int:
    obj = _load_input(args.input)
    group, A = _load_matrix_job(obj)
    if "character" not in obj or "rep" not in obj:
        raise CliError("bounds needs a character (target Zd) and a rep in the input")
    phi = serialize.character_from_json(obj["character"])
    V = serialize.rep_from_json(obj["rep"])
    kernel_dim = float(obj.get("kernel_dim", 0.0))
    has_section = bool(obj.get("has_section", False))
    try:
        cert = bound_certificate(A, phi, V, kernel_dim, has_section=has_section)
    except ValueError as e:
        raise CliError(str(e))
    _emit(
        {"lower": cert.lower, "upper": cert.upper, "theta_lower": cert.theta_lower},
        args,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    obj = _load_input(args.input)
    cx, phi = _load_complex_and_character(obj)
    phi = phi.as_real()
    check = args.check
    try:
        if check == "scaling":
            rep = verify_scaling(cx, phi, args.r, tol=args.tol)
        elif check == "duality":
            dual_obj = obj.get("dual")
            dual = serialize.complex_from_json(dual_obj) if dual_obj else cx
            rep = verify_duality(cx, dual, cx.top, phi, tol=args.tol)
        elif check == "restriction":
            moduli = args.moduli or [2] * cx.group.rank
            rep = verify_restriction(cx, phi, moduli, tol=args.tol)
        elif check == "basechange":
            if "change" not in obj:
                raise CliError("basechange verification needs a `change` object")
            ch = obj["change"]
            change = BasisChange(
                {
                    int(n): (
                        tuple(d["perm"]),
                        tuple(d["signs"]),
                        tuple(tuple(k) if k is not None else None for k in d["keys"]),
                    )
                    for n, d in ch.items()
                }
            )
            rep = verify_base_change(cx, phi, change, tol=args.tol)
        elif check == "sum":
            if "quotient_complex" not in obj:
                raise CliError("sum verification needs a `quotient_complex`")
            quot = serialize.complex_from_json(obj["quotient_complex"])
            total = extension_complex(cx, quot)
            rep = verify_sum(cx, quot, total, phi, tol=args.tol)
        elif check == "product":
            ranks = obj.get("finite_ranks", [1])
            bnds = obj.get("finite_boundaries", [])
            rep = verify_product(cx, ranks, bnds, phi, tol=args.tol)
        else:
            raise CliError(f"unknown check {check!r}")
    except ValueError as e:
        raise CliError(str(e))
    _emit(
        {"check": check, "ok": bool(rep.ok), "max_residual": float(rep.max_residual),
         "detail": {k: (list(v) if isinstance(v, tuple) else v) for k, v in rep.detail.items()}},
        args,
    )
    if not rep.ok:
        _diag(f"verification {check} failed", max_residual=rep.max_residual)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="l2twist",
        description="Twisted L2-invariants: Mahler measures, Fuglede-Kadison "
        "determinants, quotient approximation, torsion curves.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, grid=False):
        p.add_argument("--input", help="input JSON file")
        p.add_argument("--output", help="write the JSON result here instead of stdout")
        p.add_argument("--csv", help="write the tabular output here (RFC-4180)")
        p.add_argument("--plot", help="render a figure of the tabular output here")
        p.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance")
        p.add_argument("--quadrature-n", type=int, default=1024,
                       help="quadrature nodes per torus axis")
        p.add_argument("--svd-cutoff-factor", type=float, default=64.0,
                       help="multiplier on the SVD rank cutoff")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (default: L2TWIST_THREADS or 1)")
        p.add_argument("--strict", action="store_true",
                       help="fail (exit 4) on non-det-class points")
        if grid:
            p.add_argument("--tmin", type=float, default=0.25)
            p.add_argument("--tmax", type=float, default=4.0)
            p.add_argument("--points", type=int, default=9)

    p = sub.add_parser("mahler", help="log-Mahler measure of a Laurent polynomial")
    common(p)
    p.add_argument("--poly", help="polynomial string, e.g. '1+x+y'")
    p.add_argument("--nvars", type=int, default=None, help="pin the variable count")
    p.add_argument("--method", choices=["auto", "exact", "lawton", "quadrature"],
                   default="auto")
    p.set_defaults(fn=cmd_mahler)

    p = sub.add_parser("fkdet", help="Fuglede-Kadison log-determinant over Z^d")
    common(p)
    p.set_defaults(fn=cmd_fkdet)

    p = sub.add_parser("approx", help="finite-quotient approximation sequence")
    common(p)
    p.set_defaults(fn=cmd_approx)

    p = sub.add_parser("torsion", help="twisted torsion curve of a chain complex")
    common(p, grid=True)
    p.set_defaults(fn=cmd_torsion)

    p = sub.add_parser("degree", help="degree of the torsion function")
    common(p, grid=True)
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("bounds", help="nu/theta certificate for a twisted determinant")
    common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("verify", help="check a structural identity of the torsion")
    common(p, grid=True)
    p.add_argument("--check", required=True,
                   choices=["scaling", "duality", "restriction", "basechange",
                            "sum", "product"])
    p.add_argument("--r", type=float, default=2.0, help="scaling factor for --check scaling")
    p.add_argument("--moduli", type=int, nargs="+", default=None,
                   help="sublattice moduli for --check restriction")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = int(os.environ.get("L2TWIST_THREADS", "1") or "1")
    # all pipelines reduce in index order; thread count never changes results
    try:
        code = args.fn(args)
    except CliError as e:
        _diag(str(e))
        return e.code
    except serialize.SchemaError as e:
        _diag(f"input does not match the schema: {e}")
        return EXIT_BAD_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
