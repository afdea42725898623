"""Command-line front end: ``gribov-spectra <subcommand> [flags]``.

Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 a property
verdict failed in ``verify``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .csvio import render_csv, write_text
from .discretize import DEFAULT_EPS, DEFAULT_N, assemble, frame_rule
from .errors import NumericalError, ParameterError
from .params import KernelFrame, derive_params
from .spectral import DEFAULT_TOL, hs_norm, smallest_eigenvalue
from .studies import DEFAULT_MU_GRID, DEFAULT_RHO_PRIME_GRID, lambda_prime_limit, sweep_mu

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERDICT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _common(p: argparse.ArgumentParser, params: bool = True) -> None:
    if params:
        p.add_argument("--lambda-prime", type=float, required=True, dest="lambda_prime")
        p.add_argument("--mu", type=float, required=True)
        p.add_argument("--lambda", type=float, required=True, dest="lam")
        p.add_argument("--allow-out-of-theory", action="store_true",
                       help="accept mu <= 0 or delta < 0 (flagged in the output)")
    p.add_argument("--n", type=int, default=DEFAULT_N, help="quadrature nodes (default %(default)s)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="eigen tolerance (default %(default)s)")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS,
                   help="limit-frame truncation level r_inf(Y) = eps (default %(default)s)")
    p.add_argument("--out", help="CSV output path (default: CSV on stdout)")
    p.add_argument("--overwrite", action="store_true", help="replace an existing --out file")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gribov-spectra", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"gribov-spectra {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="Omega, sigma, gap and residual for one parameter set")
    _common(s)
    s.add_argument("--frame", choices=["native", "limit"], default=None)
    s.add_argument("--eigenvector", action="store_true", help="write the nodal eigenvector")

    s = sub.add_parser("sweep-mu", help="Omega and sigma along a mu grid")
    _common(s, params=False)
    s.add_argument("--lambda-prime", type=float, default=1.0, dest="lambda_prime")
    s.add_argument("--lambda", type=float, default=1.0, dest="lam")
    s.add_argument("--mu-grid", type=_float_list, default=DEFAULT_MU_GRID)

    s = sub.add_parser("limit-study", help="Omega(lambda') against Omega(0) along rho'")
    _common(s, params=False)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--lambda", type=float, default=1.0, dest="lam")
    s.add_argument("--rho-prime-grid", type=_float_list, default=DEFAULT_RHO_PRIME_GRID)
    s.add_argument("--no-hs", action="store_true", help="skip the Hilbert-Schmidt columns")

    s = sub.add_parser("hsnorm", help="Hilbert-Schmidt norm in a frame")
    _common(s)
    s.add_argument("--frame", choices=["native", "limit", "plain"], default="native")

    s = sub.add_parser("kernel-dump", help="assembled operator matrix, row-major")
    _common(s)
    s.add_argument("--frame", choices=["native", "limit", "plain"], default="native")
    s.add_argument("--scheme", choices=["product", "nystrom"], default="product")

    s = sub.add_parser("verify", help="run the property suite (fixed tolerances and grids)")
    s.add_argument("--n", type=int, default=DEFAULT_N, help="quadrature nodes (default %(default)s)")
    s.add_argument("--out", help="CSV output path (default: CSV on stdout)")
    s.add_argument("--overwrite", action="store_true", help="replace an existing --out file")
    s.set_defaults(tol=DEFAULT_TOL, eps=DEFAULT_EPS)
    return ap


# --------------------------------------------------------------------------


def _validate(args) -> None:
    if args.n < 2:
        raise ParameterError(f"--n must be >= 2, got {args.n}")
    if not (math.isfinite(args.tol) and args.tol > 0):
        raise ParameterError(f"--tol must be > 0, got {args.tol}")
    if not 0 < args.eps < 1:
        raise ParameterError(f"--eps must lie in (0, 1), got {args.eps}")
    if args.out:
        if os.path.exists(args.out) and not args.overwrite:
            raise ParameterError(f"{args.out} exists (pass --overwrite to replace it)")
        parent = os.path.dirname(os.path.abspath(args.out))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            raise ParameterError(f"cannot write to {args.out}")


def _params(args):
    if args.lam <= 0:
        raise ParameterError(f"lambda must be > 0, got {args.lam}")
    return derive_params(args.lambda_prime, args.mu, args.lam,
                         allow_out_of_theory=args.allow_out_of_theory)


def _settings(args, **extra) -> dict:
    meta = {"command": args.command, "n": args.n, "tol": args.tol, "eps": args.eps}
    meta.update(extra)
    return meta


def _emit(args, columns, rows, meta, summary: str, out=sys.stdout) -> None:
    text = render_csv(columns, rows, meta)
    if args.out:
        write_text(args.out, text, overwrite=args.overwrite)
    else:
        out.write(text)
        out.write("\n")
    out.write(summary.rstrip("\n") + "\n")


def _cmd_solve(args, out):
    p = _params(args)
    res = smallest_eigenvalue(p, frame=args.frame, n=args.n, eps=args.eps, tol=args.tol)
    meta = _settings(args, lambda_prime=p.lambda_prime, mu=p.mu, **{"lambda": p.lam},
                     frame=res.meta["frame"], out_of_theory=p.out_of_theory)
    if args.eigenvector:
        cols = ("index", "y", "eigenvector")
        rows = [(i, y, v) for i, (y, v) in enumerate(zip(res.nodes, res.eigenvector))]
    else:
        cols = ("lambda_prime", "mu", "lambda", "rho_prime", "delta", "frame", "n",
                "omega", "sigma", "gap", "residual", "iterations")
        rows = [(p.lambda_prime, p.mu, p.lam, p.rho_prime, p.delta, res.meta["frame"], args.n,
                 res.omega, res.sigma, res.gap, res.residual, res.iterations)]
    _emit(args, cols, rows, meta, res.summary(), out)
    return EXIT_OK


def _report_out(args, report, meta, out):
    summary = [f"{report.kind.value}"]
    for k, v in report.findings.items():
        summary.append(f"{k:<22} {v:.17g}")
    summary.append(report.verdict())
    _emit(args, report.columns, report.records, meta, "\n".join(summary), out)
    return EXIT_OK


def _cmd_sweep_mu(args, out):
    rep = sweep_mu(args.lambda_prime, args.lam, args.mu_grid, args.n, tol=args.tol, eps=args.eps)
    meta = _settings(args, lambda_prime=args.lambda_prime, **{"lambda": args.lam},
                     mu_grid=";".join("%.17g" % m for m in args.mu_grid),
                     interpretation="omega-decreasing/sigma-increasing")
    return _report_out(args, rep, meta, out)


def _cmd_limit_study(args, out):
    rep = lambda_prime_limit(args.mu, args.lam, args.rho_prime_grid, args.n, args.eps,
                             tol=args.tol, with_hs=not args.no_hs)
    meta = _settings(args, mu=args.mu, **{"lambda": args.lam},
                     rho_prime_grid=";".join("%.17g" % r for r in args.rho_prime_grid))
    return _report_out(args, rep, meta, out)


def _cmd_hsnorm(args, out):
    p = _params(args)
    frame = KernelFrame.parse(args.frame)
    rule = frame_rule(p, frame, args.n, args.eps)
    hs = hs_norm(p, frame, rule)
    meta = _settings(args, lambda_prime=p.lambda_prime, mu=p.mu, **{"lambda": p.lam}, frame=args.frame)
    cols = ("lambda_prime", "mu", "lambda", "frame", "n", "lower", "upper", "hs_norm")
    rows = [(p.lambda_prime, p.mu, p.lam, args.frame, args.n, rule.lower, rule.upper, hs)]
    _emit(args, cols, rows, meta, f"hs_norm    {hs:.17g}\ninterval   [{rule.lower:.17g}, {rule.upper:.17g}]", out)
    return EXIT_OK


def _cmd_kernel_dump(args, out):
    p = _params(args)
    rule = frame_rule(p, args.frame, args.n, args.eps)
    M = assemble(p, args.frame, rule, scheme=args.scheme)
    meta = _settings(args, lambda_prime=p.lambda_prime, mu=p.mu, **{"lambda": p.lam},
                     frame=args.frame, scheme=args.scheme)
    y, w, E = rule.nodes, rule.weights, M.entries
    rows = [(i, j, y[i], y[j], w[j], E[i, j]) for i in range(M.n) for j in range(M.n)]
    summary = f"matrix     {M.n}x{M.n} frame={args.frame} scheme={args.scheme}\ninterval   [{rule.lower:.17g}, {rule.upper:.17g}]"
    _emit(args, ("i", "j", "y_i", "y_j", "weight_j", "entry"), rows, meta, summary, out)
    return EXIT_OK


def _cmd_verify(args, out):
    from .verification import run_suite

    results = run_suite(n=args.n)
    rows = [(g, c.name, c.value, c.threshold, "PASS" if c.passed else "FAIL") for g, c in results]
    meta = _settings(args, mu_grid=";".join("%g" % m for m in DEFAULT_MU_GRID),
                     rho_prime_grid=";".join("%g" % r for r in DEFAULT_RHO_PRIME_GRID))
    summary = "\n".join(c.line() for _, c in results)
    _emit(args, ("group", "check", "value", "threshold", "verdict"), rows, meta, summary, out)
    return EXIT_OK if all(c.passed for _, c in results) else EXIT_VERDICT


COMMANDS = {
    "solve": _cmd_solve,
    "sweep-mu": _cmd_sweep_mu,
    "limit-study": _cmd_limit_study,
    "hsnorm": _cmd_hsnorm,
    "kernel-dump": _cmd_kernel_dump,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    """Execute one command; returns the process exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        _validate(args)
        with np.errstate(over="ignore"):
            return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_INPUT
    except (ParameterError, FileExistsError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
