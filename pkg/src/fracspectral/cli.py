"""Command-line front end.

Subcommands::

    fracspectral kernel --alpha 1.6 --r 0.2764
    fracspectral apply  --alpha 1.4 --r 0.5 --coeffs 1,0,2
    fracspectral solve  --method spectral --case 3 --N 8
    fracspectral solve  --method fem --case 1 --h 1/64
    fracspectral study  --method fem --case 1 --h-list 1/64,1/128,1/256

Exit codes: 0 success, 2 usage or parameter error, 3 numerical accuracy
failure, 4 I/O error. Output is CSV (default) or JSON and is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .cases import CASE_IDS, ManufacturedCase, get_case
from .errors import AccuracyError, DomainError, NumericError
from .fem import Mesh, convergence_study, l2_error, slobodetskii_error, solve_fem
from .fracops import apply_L_to_weighted_polynomial
from .kernelspace import kernel_K, kernel_flux_terms, kernel_k
from .params import FractionalParams
from .spectral import RhsFunction, SpectralProblem, solve as spectral_solve, weighted_error

__all__ = ["main", "build_parser", "format_number"]

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY, EXIT_IO = 0, 2, 3, 4

# used when no operator parameters are given
DEFAULT_ALPHA, DEFAULT_R = 1.5, 0.5


class UsageError(Exception):
    pass


def format_number(value) -> str:
    """Scientific notation with 6 significant digits; empty for missing values."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.5e}"


def _parse_h(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse mesh size {text!r}") from None


def _parse_list(text: str, conv) -> list:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError("empty list")
    try:
        return [conv(t) for t in items]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def _params(args) -> FractionalParams:
    given = [v is not None for v in (args.r, args.beta, args.p)]
    if sum(given) > 1:
        raise UsageError("give at most one of --r, --beta, --p")
    alpha = DEFAULT_ALPHA if args.alpha is None else args.alpha
    if args.beta is not None:
        return FractionalParams.from_beta(alpha, args.beta)
    if args.p is not None:
        return FractionalParams.from_beta(alpha, args.p + 1.0)
    return FractionalParams(alpha, DEFAULT_R if args.r is None else args.r)


def _case_and_params(args) -> tuple[Optional[ManufacturedCase], FractionalParams, RhsFunction]:
    if args.case is not None:
        if args.f is not None:
            raise UsageError("--case and --f are mutually exclusive")
        case = get_case(args.case)
        if args.alpha is not None and abs(args.alpha - case.alpha) > 1e-9:
            raise UsageError(f"case {case.case_id} has alpha = {case.alpha}")
        if args.r is not None and abs(args.r - case.r) > 5e-4:
            raise UsageError(f"case {case.case_id} has r = {case.r:.6g}")
        return case, case.params, case.rhs
    if args.f is None:
        raise UsageError("one of --case or --f is required")
    return None, _params(args), _parse_rhs(args.f)


def _parse_rhs(spec: str) -> RhsFunction:
    """``zero``, ``const:<c>`` or ``poly:<c0>,<c1>,...`` (ascending powers)."""
    if spec == "zero":
        return RhsFunction.zero()
    kind, _, rest = spec.partition(":")
    if kind == "const":
        try:
            return RhsFunction.constant(float(rest))
        except ValueError:
            raise UsageError(f"bad constant in {spec!r}") from None
    if kind == "poly":
        coef = np.array(_parse_list(rest, float))
        return RhsFunction.from_callable(np.polynomial.Polynomial(coef))
    raise UsageError(f"unknown right-hand side {spec!r}; use zero, const:C or poly:c0,c1,...")


def _params_record(params: FractionalParams) -> dict:
    return {"alpha": params.alpha, "r": params.r, "beta": params.beta, "p": params.p, "q": params.q}


def _sample_points(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 1)


# --- commands -----------------------------------------------------------------

def cmd_kernel(args) -> tuple[dict, list[str], list[list]]:
    params = _params(args)
    al, r = params.alpha, params.r
    x = np.linspace(0.0, 1.0, args.samples + 2)[1:-1]
    left, right = kernel_flux_terms(al, r, x)
    k = kernel_k(al, r, x)
    K = kernel_K(al, r, x)
    header = ["x", "k", "K", "residual", "left_flux", "right_flux"]
    rows = [list(t) for t in zip(x, k, K, left + right, left, right)]
    record = {
        "command": "kernel",
        "params": _params_record(params),
        "samples": [dict(zip(header, map(float, row))) for row in rows],
    }
    return record, header, rows


def cmd_apply(args) -> tuple[dict, list[str], list[list]]:
    params = _params(args)
    coef = _parse_list(args.coeffs, float)
    out = apply_L_to_weighted_polynomial(params, coef).coef
    header = ["degree", "coefficient"]
    rows = [[j, c] for j, c in enumerate(out)]
    record = {"command": "apply", "params": _params_record(params), "coefficients": [float(c) for c in out]}
    return record, header, rows


def cmd_solve(args) -> tuple[dict, list[str], list[list]]:
    case, params, rhs = _case_and_params(args)
    x = _sample_points(args.samples)
    record = {"command": "solve", "params": _params_record(params), "method": args.method,
              "case": None if case is None else case.case_id}
    errors = {}
    if args.method == "spectral":
        if args.N is None:
            raise UsageError("--N is required for the spectral method")
        problem = SpectralProblem(params)
        sol = spectral_solve(problem, rhs, args.N)
        u = sol(x)
        record["resolution"] = {"N": args.N}
        record["coefficients"] = [float(c) for c in sol.coeffs]
        if case is not None:
            for which, key in (("L2", "l2"), ("L2_omega", "l2_omega"), ("L2_omega_inv", "l2_omega_inv")):
                errors[key] = weighted_error(problem, sol, case.u_exact, which, case.u_over_omega)
    else:
        if args.h is None:
            raise UsageError("--h is required for the fem method")
        mesh = Mesh.from_h(_parse_h(args.h))
        system = solve_fem(case if case is not None else rhs, mesh, params.alpha, params.r)
        u = system.evaluate(x)
        record["resolution"] = {"h": mesh.h}
        if case is not None:
            errors["l2"] = l2_error(case, system)
            if not args.no_seminorm:
                errors["seminorm"] = slobodetskii_error(case, system)
    if errors:
        record["errors"] = errors
    header = ["x", "u"] + (["u_exact"] if case is not None else [])
    exact = case.u_exact(x) if case is not None else None
    rows = [[xi, ui] + ([exact[i]] if exact is not None else []) for i, (xi, ui) in enumerate(zip(x, u))]
    record["samples"] = [dict(zip(header, map(float, row))) for row in rows]
    return record, header, rows


def cmd_study(args) -> tuple[dict, list[str], list[list]]:
    if args.case is None:
        raise UsageError("study requires --case")
    case = get_case(args.case)
    record = {"command": "study", "params": _params_record(case.params), "method": args.method,
              "case": case.case_id}
    if args.method == "fem":
        h_list = _parse_list(args.h_list, _parse_h)
        table = convergence_study(case, h_list, with_seminorm=not args.no_seminorm)
        header = ["h", "err_seminorm", "rate_seminorm", "err_l2", "rate_l2"]
        rows = [[r.h, r.seminorm, r.seminorm_rate, r.l2, r.l2_rate] for r in table.rows]
        rows.append(["Pred.", None, table.predicted_seminorm, None, table.predicted_l2])
        record["resolution"] = {"h_list": [r.h for r in table.rows]}
        record["predicted"] = {"seminorm": table.predicted_seminorm, "l2": table.predicted_l2}
    else:
        N_list = _parse_list(args.N_list, int)
        problem = SpectralProblem(case.params)
        header = ["N", "err_l2_omega_inv", "err_l2"]
        rows = []
        for N in N_list:
            sol = spectral_solve(problem, case.rhs, N)
            rows.append([N,
                         weighted_error(problem, sol, case.u_exact, "L2_omega_inv", case.u_over_omega),
                         weighted_error(problem, sol, case.u_exact, "L2", case.u_over_omega)])
        record["resolution"] = {"N_list": N_list}
    record["table"] = [dict(zip(header, row)) for row in rows]
    return record, header, rows


# --- output -------------------------------------------------------------------

def _csv_text(header: list[str], rows: list[list], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, (str, int)) and not isinstance(c, bool) else format_number(c)
                         for c in row])
    return buf.getvalue()


def _json_text(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _plot_series(record: dict, header: list[str], rows: list[list]) -> str:
    """Two-column (x, y) blocks, one per series, separated by blank lines."""
    blocks = []
    xcol = header[0]
    numeric = [r for r in rows if not isinstance(r[0], str)]
    for j, name in enumerate(header[1:], start=1):
        if name.startswith("rate"):
            continue
        lines = [f"# {name} vs {xcol}"]
        for r in numeric:
            if r[j] is not None:
                lines.append(f"{format_number(r[0])} {format_number(r[j])}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _common(p: argparse.ArgumentParser, params: bool = True) -> None:
    if params:
        p.add_argument("--alpha", type=float, help=f"order, 1 < alpha < 2 (default {DEFAULT_ALPHA})")
        p.add_argument("--r", type=float, help=f"left/right mixing ratio (default {DEFAULT_R})")
        p.add_argument("--beta", type=float, help="weight exponent instead of r")
        p.add_argument("--p", type=float, help="kernel exponent p = beta - 1 instead of r")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--plot-data", help="also write (x, y) series for plotting to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracspectral", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="kernel exponents and annihilation residuals")
    _common(p)
    p.add_argument("--samples", type=int, default=9, help="number of interior sample points")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("apply", help="apply the operator to omega times a polynomial")
    _common(p)
    p.add_argument("--coeffs", required=True, help="monomial coefficients c0,c1,...")
    p.set_defaults(func=cmd_apply)

    for name, func in (("solve", cmd_solve), ("study", cmd_study)):
        p = sub.add_parser(name, help=f"{name} with the spectral or finite element method")
        _common(p)
        p.add_argument("--method", choices=("spectral", "fem"), default="spectral")
        p.add_argument("--case", type=int, choices=CASE_IDS, help="manufactured case")
        p.add_argument("--no-seminorm", action="store_true", help="skip the seminorm error")
        if name == "solve":
            p.add_argument("--f", help="right-hand side: zero, const:C or poly:c0,c1,...")
            p.add_argument("--N", type=int, help="spectral degree")
            p.add_argument("--h", help="mesh size, e.g. 1/64")
            p.add_argument("--samples", type=int, default=64, help="number of sample intervals")
        else:
            p.add_argument("--h-list", default="1/64,1/128,1/256,1/512,1/1024,1/2048")
            p.add_argument("--N-list", default=",".join(str(n) for n in range(2, 41, 2)))
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record, header, rows = args.func(args)
        comments = []
        if record["command"] == "kernel":
            comments = [" ".join(f"{k}={format_number(v)}" for k, v in record["params"].items())]
        text = _json_text(record) if args.format == "json" else _csv_text(header, rows, comments)
        _write(text, args.output)
        if args.plot_data:
            _write(_plot_series(record, header, rows), args.plot_data)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, NumericError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
