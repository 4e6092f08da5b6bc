"""Command-line front end.

Subcommands: ``spectrum`` (multiplier/angular-velocity tables), ``phi``
(universal-function profiles), ``verify`` (named check suites), ``branch``
(amplitude continuation), ``models`` (catalog listing).  Output goes to
--output or stdout; CSV carries ``#``-prefixed metadata lines with the full
flag set, JSON carries a ``metadata`` object.  Exit codes: 0 success,
1 user/validation error, 2 numerical failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import contour, spectrum
from .cmkernel import ALL_MODELS, MODEL_PARAMETERS, make_kernel
from .errors import ConvergenceError, DomainError, UnsupportedMethodError
from .phi import (
    chi_bounds_check,
    phi,
    phi_bounds_check,
    phi_lower_bound,
    phi_ode_residual,
    phi_upper_bound,
    phi_values,
)


class CliError(Exception):
    """User/validation error (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_params(model: str, pairs) -> dict:
    allowed = MODEL_PARAMETERS[model]
    params = {}
    for raw in pairs or []:
        if "=" not in raw:
            raise CliError(f"--param expects key=value, got '{raw}'")
        key, val = raw.split("=", 1)
        if key not in allowed:
            raise CliError(
                f"unknown parameter '{key}' for model '{model}'; valid: "
                f"{', '.join(allowed) if allowed else '(none)'}")
        try:
            params[key] = float(val)
        except ValueError as exc:
            raise CliError(f"parameter '{key}' must be a number") from exc
    required = {
        "gsqg": ("beta",), "qgsw": ("eps",), "euler-alpha": ("alpha",),
        "qgsw-disc": ("eps",),
    }.get(model, ())
    for key in required:
        if key not in params:
            raise CliError(f"model '{model}' requires --param {key}=...")
    if model == "gsqg-disc":
        if "spectral_exponent" not in params:
            if "beta" not in params:
                raise CliError(
                    "gsqg-disc requires --param beta=... (used as the "
                    "spectral exponent) or --param spectral_exponent=...")
            params["spectral_exponent"] = params["beta"]
    return params


def _check_model(model: str):
    if model not in ALL_MODELS:
        raise CliError(
            f"unknown model '{model}'; available: {', '.join(ALL_MODELS)}")


def _check_b(model: str, b: float):
    if model.endswith("-disc"):
        if not (0.0 < b < 1.0):
            raise CliError("disc models require 0 < b < 1")
    elif b <= 0.0:
        raise CliError("b must be positive")


def _metadata(args) -> dict:
    skip = {"func", "output"}
    meta = {}
    for key, val in sorted(vars(args).items()):
        if key in skip or val is None:
            continue
        meta[key] = val if not isinstance(val, list) else ",".join(map(str, val))
    return meta


def _emit(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(args) -> int:
    _check_model(args.model)
    params = _parse_params(args.model, args.param)
    _check_b(args.model, args.b)
    if args.n_max < 1:
        raise CliError("--n-max must be >= 1")
    table = spectrum.build_spectrum_table(args.model, params, args.b,
                                          args.n_max, args.method)
    meta = _metadata(args)
    text = (table.to_csv(meta) if args.format == "csv"
            else table.to_json(meta) + "\n")
    _emit(text, args.output)
    return 0


# ---------------------------------------------------------------------------
# phi profiles


def cmd_phi(args) -> int:
    try:
        orders = [int(tok) for tok in args.n.split(",")]
    except ValueError as exc:
        raise CliError("--n expects a comma-separated integer list") from exc
    if any(n < 1 for n in orders):
        raise CliError("orders must be positive")
    if args.x_count < 1 or args.x_min <= 0 or args.x_max < args.x_min:
        raise CliError("need 0 < x-min <= x-max and x-count >= 1")
    if args.x_scale == "log":
        xs = np.logspace(math.log10(args.x_min), math.log10(args.x_max),
                         args.x_count)
    else:
        xs = np.linspace(args.x_min, args.x_max, args.x_count)
    lines = [f"# {k}={v}" for k, v in _metadata(args).items()]
    lines.append("n,x,phi,ode_residual,lower_bound,upper_bound")
    for n in orders:
        vals = phi_values(n, xs)
        lo = phi_lower_bound(n, xs)
        hi = phi_upper_bound(n, xs)
        for x, v, lo_i, hi_i in zip(xs, vals, lo, hi):
            res = phi_ode_residual(n, float(x))
            lines.append(f"{n},{x!r},{v!r},{res!r},{lo_i!r},{hi_i!r}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _suite_positivity(model, params, b):
    failures = []
    if model.endswith("-disc"):
        for n in range(1, 9):
            lam = (spectrum.lambda_qgsw_disc(n, b, params["eps"])
                   if model == "qgsw-disc" else
                   spectrum.lambda_gsqg_disc_series(n, b, params["spectral_exponent"])
                   if model == "gsqg-disc" else
                   0.5 - spectrum.euler_disc_omega_closed(n, b))
            if not lam > 0.0:
                failures.append({"case": f"lambda_{n}", "expected": "> 0",
                                 "got": lam})
    else:
        kernel = make_kernel(model, params)
        for n in range(1, 17):
            lam, _ = spectrum.lambda_best(kernel, n, b)
            if model != "euler-alpha" and not lam > 0.0:
                failures.append({"case": f"lambda_{n}", "expected": "> 0",
                                 "got": lam})
    for n in (1, 2, 8, 64):
        vals = phi_values(n, np.logspace(-2, 2, 50))
        if not np.all(vals > 0.0):
            failures.append({"case": f"phi_{n} positivity",
                             "expected": "> 0", "got": float(vals.min())})
    return failures, {}


def _suite_monotonicity(model, params, b):
    failures = []
    if model.endswith("-disc"):
        rep = spectrum.monotonicity_report(model, 24, b, params)
    else:
        rep = spectrum.monotonicity_report(make_kernel(model, params), 24, b)
    if rep.first_violation is not None:
        failures.append({"case": "strict increase",
                         "expected": "monotone",
                         "got": f"violated at n={rep.first_violation}"})
    for i, (dn, ok) in enumerate(rep.brackets):
        if not ok:
            failures.append({"case": f"bracket n={i+1}",
                             "expected": f"[{0.5*dn!r}, {4*dn!r}]",
                             "got": rep.diffs[i]})
    return failures, {}


def _suite_phi_bounds(model, params, b):
    failures = []
    grid = np.logspace(-3, 3, 120)
    for n in (1, 2, 4, 8, 64):
        rep = phi_bounds_check(n, grid)
        if not rep.ok:
            failures.append({"case": f"n={n}", "expected": "<= 1e-10",
                             "got": max(rep.max_lower_violation,
                                        rep.max_upper_violation)})
    return failures, {}


def _suite_chi_bounds(model, params, b):
    failures = []
    grid = np.logspace(-3, 3, 120)
    for n in range(1, 9):
        rep = chi_bounds_check(n, grid)
        if not rep.ok:
            failures.append({"case": f"n={n}", "expected": "<= 1e-10",
                             "got": max(rep.max_lower_violation,
                                        rep.max_upper_violation)})
    return failures, {}


def _suite_ode_residual(model, params, b):
    failures = []
    for n in (1, 2, 8, 64):
        for x in (1e-3, 0.1, 1.0, 10.0, 100.0):
            r = phi_ode_residual(n, x)
            if abs(r) > 1e-7:
                failures.append({"case": f"n={n} x={x}",
                                 "expected": "<= 1e-7", "got": r})
    return failures, {}


def _suite_factorization(model, params, b):
    if model.endswith("-disc") or model == "euler-alpha":
        raise CliError(
            f"factorization suite needs a completely monotone plane kernel, "
            f"not '{model}'")
    kernel = make_kernel(model, params)
    failures = []
    for n in (1, 2, 4, 8):
        d = spectrum.lambda_direct(kernel, n, b)
        f = spectrum.lambda_factorized(kernel, n, b)
        rel = abs(f - d) / abs(d)
        if rel > 1e-7:
            failures.append({"case": f"n={n}", "expected": "rel <= 1e-7",
                             "got": rel})
    return failures, {}


def _suite_convexity(model, params, b):
    if model.endswith("-disc"):
        raise CliError("convexity suite applies to plane kernels")
    kernel = make_kernel(model, params)
    rep = spectrum.convexity_report(kernel, 24, b)
    failures = []
    if not rep.convex:
        failures.append({"case": "second differences",
                         "expected": ">= -1e-12",
                         "got": rep.min_second_difference})
    flags = {} if rep.status == "theorem" else {"status": "conjecture"}
    return failures, flags


def _suite_asymptotics(model, params, b):
    if model not in ("euler", "gsqg"):
        raise CliError("asymptotics suite covers the scale-invariant models")
    kernel = make_kernel(model, params)
    coeffs = spectrum.asymptotic_coeffs(kernel, 2, b)
    failures = []
    ns = np.array([16, 23, 32, 45, 64, 91, 128])
    for N in (0, 1):
        rem = np.array([abs(spectrum.lambda_best(kernel, int(n), b)[0]
                            - spectrum.lambda_partial_sum(kernel, int(n), b, N, coeffs))
                        for n in ns])
        lam_scale = np.array([abs(spectrum.lambda_best(kernel, int(n), b)[0])
                              for n in ns])
        floor = 1e-11 * lam_scale
        if np.all(rem <= floor):
            continue  # expansion exact to rounding; exponent holds vacuously
        slope = np.polyfit(np.log(ns), np.log(np.maximum(rem, 1e-300)), 1)[0]
        if slope > -(2 * N + 5.0 / 3.0 - 0.35):
            failures.append({"case": f"N={N}",
                             "expected": f"slope <= {-(2*N+5/3-0.35):.4f}",
                             "got": slope})
    return failures, {}


def _suite_disc_series(model, params, b):
    failures = []
    if model == "qgsw-disc":
        eps = params["eps"]
        for n in (1, 2, 4):
            closed = spectrum.lambda_qgsw_disc(n, b, eps)
            series = spectrum.lambda_qgsw_disc_series(n, b, eps, 200)
            if abs(series - closed) > 1e-6:
                failures.append({"case": f"n={n}", "expected": closed,
                                 "got": series})
    elif model == "gsqg-disc":
        for n in (1, 2):
            v = spectrum.lambda_gsqg_disc_series(n, b, 0.0, 400)
            ref = (1.0 - b ** (2 * n)) / (2.0 * n)
            if abs(v - ref) > 1e-4:
                failures.append({"case": f"exponent-0 n={n}",
                                 "expected": ref, "got": v})
    elif model == "euler-disc":
        for n in (2, 3):
            ref = spectrum.euler_disc_omega_closed(n, b)
            v = spectrum.euler_disc_omega_integral(n, b)
            if abs(v - ref) > 1e-7:
                failures.append({"case": f"integral-route n={n}",
                                 "expected": ref, "got": v})
    else:
        raise CliError("disc-series suite applies to disc models")
    return failures, {}


_SUITES = {
    "positivity": _suite_positivity,
    "monotonicity": _suite_monotonicity,
    "phi-bounds": _suite_phi_bounds,
    "chi-bounds": _suite_chi_bounds,
    "ode-residual": _suite_ode_residual,
    "factorization": _suite_factorization,
    "convexity": _suite_convexity,
    "asymptotics": _suite_asymptotics,
    "disc-series": _suite_disc_series,
}


def cmd_verify(args) -> int:
    if args.suite not in _SUITES:
        raise CliError(
            f"unknown suite '{args.suite}'; available: "
            f"{', '.join(sorted(_SUITES))}")
    _check_model(args.model)
    params = _parse_params(args.model, args.param)
    _check_b(args.model, args.b)
    failures, flags = _SUITES[args.suite](args.model, params, args.b)
    report = {
        "suite": args.suite,
        "model": args.model,
        "passes": not failures,
        "failures": failures,
    }
    if flags:
        report["flags"] = flags
    report["metadata"] = _metadata(args)
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return 0 if not failures else 2


def cmd_branch(args) -> int:
    _check_model(args.model)
    params = _parse_params(args.model, args.param)
    _check_b(args.model, args.b)
    if args.model in ("gsqg-disc", "qgsw-disc"):
        raise CliError(f"model '{args.model}' not supported for continuation")
    if args.m < 1:
        raise CliError("--m must be >= 1")
    if args.xi_max <= 0 or args.steps < 1:
        raise CliError("need --xi-max > 0 and --steps >= 1")
    branch = contour.continue_branch(
        args.model, args.m, args.b, args.xi_max, args.steps,
        newton_tol=args.newton_tol, modes=args.modes, params=params)
    meta = _metadata(args)
    _emit(branch.to_json(meta) + "\n", args.output)
    if args.output:
        stem = args.output.rsplit(".", 1)[0]
        for i, point in enumerate(branch.points):
            path = f"{stem}_boundary_{i:03d}.csv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(contour.boundary_csv(
                    point, {**meta, "xi": point.amplitude}))
    if branch.failure:
        sys.stderr.write(f"partial branch: {branch.failure}\n")
        return 2
    return 0


def cmd_models(args) -> int:
    lines = []
    for model in ALL_MODELS:
        ps = MODEL_PARAMETERS[model]
        lines.append(f"{model}: parameters "
                     f"{', '.join(ps) if ps else '(none)'}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vstates",
                     description="Spectra, universal-function profiles and "
                                 "V-state branches for active scalar "
                                 "equations")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="emit a spectrum table")
    sp.add_argument("--model", required=True)
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--method", default="auto",
                    choices=["auto", "closed", "direct", "factorized"])
    sp.add_argument("--format", default="csv", choices=["csv", "json"])
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_spectrum)

    ph = sub.add_parser("phi", help="universal-function profile as CSV")
    ph.add_argument("--n", required=True,
                    help="comma-separated positive orders")
    ph.add_argument("--x-min", type=float, default=1e-3)
    ph.add_argument("--x-max", type=float, default=1e3)
    ph.add_argument("--x-count", type=int, default=100)
    ph.add_argument("--x-scale", default="log", choices=["log", "linear"])
    ph.add_argument("--output")
    ph.set_defaults(func=cmd_phi)

    ve = sub.add_parser("verify", help="run a named verification suite")
    ve.add_argument("--suite", required=True)
    ve.add_argument("--model", required=True)
    ve.add_argument("--param", action="append", metavar="KEY=VALUE")
    ve.add_argument("--b", type=float, default=1.0)
    ve.add_argument("--output")
    ve.set_defaults(func=cmd_verify)

    br = sub.add_parser("branch", help="continue an m-fold branch")
    br.add_argument("--model", required=True)
    br.add_argument("--param", action="append", metavar="KEY=VALUE")
    br.add_argument("--m", type=int, required=True)
    br.add_argument("--b", type=float, default=1.0)
    br.add_argument("--xi-max", type=float, required=True)
    br.add_argument("--steps", type=int, required=True)
    br.add_argument("--newton-tol", type=float, default=1e-10)
    br.add_argument("--modes", type=int, default=None)
    br.add_argument("--output")
    br.set_defaults(func=cmd_branch)

    mo = sub.add_parser("models", help="list models and their parameters")
    mo.add_argument("--output")
    mo.set_defaults(func=cmd_models)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (DomainError, UnsupportedMethodError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ConvergenceError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
