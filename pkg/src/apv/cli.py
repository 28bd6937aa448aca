"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 quadrature accuracy failure
(the best estimate is still emitted). Output is CSV (metadata and trailing
blocks on ``#`` comment lines) or a single JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from . import __name__ as _pkg
from .asymptotics import RhoSamples, basis_size, fit_asymptotic, geometric_grid
from .core import PoleProblem, check_rho
from .errors import AccuracyFailure, ApvError
from .expr import parse, to_integrand
from .mirror import (
    MirrorConfig,
    dispersion_z_closed_form,
    velocity_dispersion_x,
    velocity_dispersion_z,
)
from .regularize import KERNEL_FORMS, RegMethod, compare_methods, counterexample_i1, kernel_integral, regularize

EXIT_OK, EXIT_INVALID, EXIT_ACCURACY = 0, 2, 3
SCHEMA_VERSION = 1


class InvalidConfig(ApvError, ValueError):
    pass


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value is not a number: {value!r}") from None


def _add_problem(p):
    p.add_argument("--f", required=True, help="integrand expression in x, e.g. '(1-x)/(x+s)^2'")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--n", type=int, required=True)


def _add_grid(p):
    p.add_argument("--rho-start", type=float, required=True)
    p.add_argument("--rho-ratio", type=float, default=0.5)
    p.add_argument("--rho-count", type=int, default=5)


def _add_output(p, tol=1e-10):
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--output", "-o", default="-", help="output path, '-' for standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apv", description="Asymptotic principal values of singular integrals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one regularization at one cutoff")
    _add_problem(p)
    p.add_argument("--method", choices=[m.value for m in RegMethod], default="apv")
    p.add_argument("--kernel-form", choices=KERNEL_FORMS, default="real_part")
    p.add_argument("--rho", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("sweep", help="evaluate over a geometric cutoff grid, optionally fit")
    _add_problem(p)
    p.add_argument("--method", choices=[m.value for m in RegMethod], default="apv")
    p.add_argument("--kernel-form", choices=KERNEL_FORMS, default="real_part")
    _add_grid(p)
    p.add_argument("--fit", action="store_true")
    p.add_argument("--max-power", type=int, default=None, help="highest pole power in the fit (default n-1)")
    p.add_argument("--log", action="store_true", help="include a ln(rho) term in the fit")
    _add_output(p)

    p = sub.add_parser("compare", help="all three methods per cutoff with the gap order fit")
    _add_problem(p)
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("mirror", help="probe velocity dispersions near a reflecting mirror")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--rho", type=float, default=1e-3)
    p.add_argument("--charge", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    _add_output(p, tol=1e-12)

    p = sub.add_parser("counterexample", help="int_{-1}^{1} x/x dx under three treatments")
    _add_grid(p)
    _add_output(p, tol=1e-12)
    return parser


# ---- output

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def render(doc: dict, fmt: str) -> str:
    """Serialize ``{"meta", "rows", ...extra blocks}`` deterministically."""
    doc = _jsonable(doc)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# meta: " + json.dumps(doc["meta"], separators=(",", ":")) + "\n")
    rows = doc["rows"]
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in header])
    for key, block in doc.items():
        if key not in ("meta", "rows"):
            buf.write(f"# {key}: " + json.dumps(block, separators=(",", ":")) + "\n")
    return buf.getvalue()


def _emit(doc, args):
    text = render(doc, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _meta(args, **extra):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("format", "output", "handler")}
    return {"program": _pkg, "schema": SCHEMA_VERSION, "config": cfg, **extra}


# ---- config helpers

def _problem(args) -> PoleProblem:
    params = dict(args.param)
    ast = parse(args.f, params.keys())
    f = to_integrand(ast, params, label=args.f)
    return PoleProblem(args.a, args.b, args.c, args.n, f)


def _grid(args, problem=None) -> list[float]:
    rhos = geometric_grid(args.rho_start, args.rho_ratio, args.rho_count)
    if problem is not None:
        for r in rhos:
            check_rho(problem, r)
    return rhos


def _check_tol(args):
    if not args.tol > 0:
        raise InvalidConfig("--tol must be positive")


def _evaluate(problem, method, rho, tol, kernel_form):
    if method is RegMethod.COMPLEX_KERNEL:
        return kernel_integral(problem, rho, tol, form=kernel_form)
    return regularize(problem, method, rho, tol)


def _record(method, r):
    return {
        "method": method.value,
        "rho": r.rho,
        "value": r.value,
        "error_estimate": r.abs_error_estimate,
        "evaluations": r.evaluations,
    }


# ---- subcommands

def cmd_eval(args) -> int:
    _check_tol(args)
    problem = _problem(args)
    method = RegMethod(args.method)
    rho = check_rho(problem, args.rho) if method is not RegMethod.COMPLEX_KERNEL else args.rho
    if not rho > 0:
        raise InvalidConfig("--rho must be positive")
    try:
        r = _evaluate(problem, method, rho, args.tol, args.kernel_form)
    except AccuracyFailure as exc:
        row = {"method": method.value, "rho": rho, "value": exc.value,
               "error_estimate": exc.abs_error_estimate, "evaluations": exc.evaluations}
        _emit({"meta": _meta(args), "rows": [row], "warnings": [str(exc)]}, args)
        return EXIT_ACCURACY
    _emit({"meta": _meta(args), "rows": [_record(method, r)]}, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    _check_tol(args)
    problem = _problem(args)
    method = RegMethod(args.method)
    rhos = _grid(args, problem)
    rows, results, warnings = [], [], []
    status = EXIT_OK
    for rho in rhos:
        try:
            r = _evaluate(problem, method, rho, args.tol, args.kernel_form)
        except AccuracyFailure as exc:
            status = EXIT_ACCURACY
            warnings.append(f"rho={_fmt(rho)}: {exc}")
            rows.append({"method": method.value, "rho": rho, "value": exc.value,
                         "error_estimate": exc.abs_error_estimate, "evaluations": exc.evaluations})
            continue
        results.append(r)
        rows.append(_record(method, r))
    doc = {"meta": _meta(args), "rows": rows}
    if args.fit:
        max_power = problem.n - 1 if args.max_power is None else args.max_power
        need = basis_size(max_power, args.log) + 1
        if len(results) < need:
            warnings.append(f"fit skipped: {need} cutoffs needed, {len(results)} available")
        else:
            try:
                fit = fit_asymptotic(RhoSamples.from_results(results), max_power, args.log)
                doc["fit"] = fit.as_dict()
            except ApvError as exc:
                warnings.append(f"fit skipped: {exc}")
    if warnings:
        doc["warnings"] = warnings
    _emit(doc, args)
    return status


def cmd_compare(args) -> int:
    _check_tol(args)
    problem = _problem(args)
    rhos = _grid(args, problem)
    try:
        report = compare_methods(problem, rhos, args.tol)
    except AccuracyFailure as exc:
        _emit({"meta": _meta(args), "rows": [], "warnings": [str(exc)]}, args)
        return EXIT_ACCURACY
    doc = {
        "meta": _meta(args),
        "rows": [r.as_dict() for r in report.rows],
        "summary": {"n": report.n, "gap_order": report.gap_order, "gap_coefficient": report.gap_coefficient},
    }
    if report.warnings:
        doc["warnings"] = list(report.warnings)
    _emit(doc, args)
    return EXIT_OK


def cmd_mirror(args) -> int:
    _check_tol(args)
    cfg = MirrorConfig(args.z, args.tau, args.charge, args.mass, args.rho)
    if cfg.singular and not args.rho < min(cfg.sigma, 1 - cfg.sigma):
        raise InvalidConfig(f"--rho must be below min(sigma, 1 - sigma) = {min(cfg.sigma, 1 - cfg.sigma)}")
    try:
        dz = velocity_dispersion_z(cfg, args.tol)
        dx = velocity_dispersion_x(cfg, args.tol)
    except AccuracyFailure as exc:
        _emit({"meta": _meta(args), "rows": [], "warnings": [str(exc)]}, args)
        return EXIT_ACCURACY
    closed = dispersion_z_closed_form(cfg) if cfg.singular else None
    row = {
        "z": cfg.z,
        "tau": cfg.tau,
        "rho": cfg.rho,
        "regime": cfg.regime,
        "dvz2": dz.value,
        "dvz2_error_estimate": dz.abs_error_estimate,
        "dvx2": dx.value,
        "dvx2_error_estimate": dx.abs_error_estimate,
        "dvz2_closed_form": closed,
        "closed_form_difference": None if closed is None else dz.value - closed,
    }
    _emit({"meta": _meta(args), "rows": [row]}, args)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    _check_tol(args)
    rhos = _grid(args)
    rep = counterexample_i1(rhos, args.tol)
    rows = [
        {
            "rho": r,
            "apv": a,
            "kernel": k,
            "partial_integral_form": q,
            "kernel_error_estimate": ke,
            "partial_integral_error_estimate": qe,
        }
        for r, a, k, q, ke, qe in zip(
            rep.rhos, rep.apv_values, rep.kernel_values, rep.partial_integral_form_values,
            rep.kernel_error_estimates, rep.partial_integral_error_estimates,
        )
    ]
    trends = {name: t.as_dict() for name, t in rep.trends.items()}
    _emit({"meta": _meta(args), "rows": rows, "trends": trends}, args)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "mirror": cmd_mirror,
    "counterexample": cmd_counterexample,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except AccuracyFailure as exc:
        print(f"apv: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (ApvError, ValueError) as exc:
        print(f"apv: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"apv: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
