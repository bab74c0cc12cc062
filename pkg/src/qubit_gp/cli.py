"""Command-line front end: single evaluations, figure sweeps, validation.

Exit codes: 0 on success, 2 when a physics validation or convergence
check fails (machine-readable diagnostics on stderr), 64 for usage
errors.  ``QUBIT_GP_OUTDIR`` sets the directory for bare output
filenames.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from .bath import BathParams
from .heom import ConvergenceError, HeomConfig, evolve
from .phase import bargmann_phase
from .rwa import QuadratureError, gp_jc_limit, gp_rwa_closed
from .sweep import (
    METHODS,
    FigureSpec,
    SweepSpec,
    figure_preset,
    run_figure,
    run_grid,
    write_manifest,
    write_table,
)
from . import validate as validate_mod
from .algebra import ValidationError

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_USAGE = 64

OUTDIR_ENV = "QUBIT_GP_OUTDIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fail(kind: str, detail: str, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "detail": detail, **extra}) + "\n")
    return EXIT_CHECK_FAILED


def _theta_from(args) -> float:
    if args.theta_frac is not None:
        return float(Fraction(args.theta_frac)) * math.pi
    if args.theta is None:
        raise ValueError("one of --theta (radians) or --theta-frac (fraction of pi) is required")
    return args.theta


def _out_path(name: str | None, default: str) -> Path:
    raw = Path(name) if name else Path(default)
    if not raw.is_absolute() and raw.parent == Path("."):
        base = os.environ.get(OUTDIR_ENV)
        if base:
            return Path(base) / raw
    return raw


def _grid_arg(text: str) -> tuple[float, ...]:
    """Comma list ("0.1,0.2") or linear range ("lin:0:1.5:100", half-open at 0)."""
    if text.startswith("lin:"):
        _, lo, hi, n = text.split(":")
        import numpy as np

        lo, hi, n = float(lo), float(hi), int(n)
        if lo == 0.0:
            return tuple(float(x) for x in np.linspace(lo, hi, n + 1)[1:])
        return tuple(float(x) for x in np.linspace(lo, hi, n))
    return tuple(float(tok) for tok in text.split(",") if tok)


def _print_single(result, as_json: bool) -> None:
    phi_over_pi = result.phi_over_pi
    if as_json:
        payload = {
            "phi_over_pi": phi_over_pi,
            "phi": result.phi,
            "overlap_re": result.overlap.real,
            "overlap_im": result.overlap.imag,
            "overlap_abs": result.overlap_abs,
            "nodal": result.nodal,
            "degenerate": result.degenerate,
            "converged": result.meta.converged,
            "method": result.meta.method,
        }
        print(json.dumps(payload))
    else:
        phi_txt = "undefined" if phi_over_pi is None else f"{phi_over_pi:+.6f}"
        print(f"phi/pi={phi_txt} overlap_abs={result.overlap_abs:.6f} nodal={str(result.nodal).lower()}")


def _add_single_args(p: argparse.ArgumentParser, with_bath: bool = True) -> None:
    p.add_argument("--theta", type=float, help="initial angle in radians, in (0, pi]")
    p.add_argument("--theta-frac", help="initial angle as a fraction of pi, e.g. 1/3")
    p.add_argument("--w", type=float, default=0.5, help="coupling strength W [omega0]")
    if with_bath:
        p.add_argument("--lambda", dest="lam", type=float, default=0.05,
                       help="spectral width lambda [omega0]")
    p.add_argument("--json", action="store_true", help="print the result as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qubit-gp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gp-rwa", help="closed-form geometric phase (RWA channel)")
    _add_single_args(p)

    p = sub.add_parser("gp-heom", help="exact geometric phase via the hierarchy")
    _add_single_args(p)
    p.add_argument("--depth", type=int, help="hierarchy truncation depth (default: auto)")
    p.add_argument("--dt", type=float, help="integrator step (default: T/4000)")
    p.add_argument("--steps", type=int, help="steps per period (alternative to --dt)")
    p.add_argument("--no-certify", action="store_true", help="skip the refinement certificate")

    p = sub.add_parser("gp-jc", help="geometric phase in the single-mode (lambda->0) limit")
    _add_single_args(p, with_bath=False)

    p = sub.add_parser("sweep", help="run a parameter grid and write a table")
    p.add_argument("--method", choices=METHODS, default="rwa-closed")
    p.add_argument("--thetas", required=True, help='grid: "a,b,c" or "lin:lo:hi:n" (radians)')
    p.add_argument("--ws", required=True, help="coupling grid, same syntax")
    p.add_argument("--lambdas", default="0.05", help="width grid (ignored for jc-limit)")
    p.add_argument("--out", help="output path (default sweep.csv)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--depth", type=int, help="hierarchy depth override")
    p.add_argument("--steps", type=int, help="hierarchy steps per period")

    p = sub.add_parser("figure", help="reproduce one of the six reference data sets")
    p.add_argument("figure", type=int, choices=range(1, 7), metavar="1..6")
    p.add_argument("--out", help="output path (default figN.csv)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="run the acceptance criteria suite")
    p.add_argument("--only", help="comma list of criteria, e.g. A1,A3,A10")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _cmd_single(args, kind: str) -> int:
    theta = _theta_from(args)
    if kind == "jc":
        result = gp_jc_limit(theta, args.w)
    elif kind == "rwa":
        result = gp_rwa_closed(theta, BathParams(args.w, args.lam))
    else:
        steps = args.steps
        dt = args.dt if args.dt is not None else (2.0 * math.pi / steps if steps else None)
        cfg = HeomConfig(depth=args.depth, dt=dt, certify=not args.no_certify)
        traj = evolve(theta, BathParams(args.w, args.lam), cfg)
        result = bargmann_phase(traj)
    _print_single(result, args.json)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    heom_cfg = HeomConfig(
        depth=args.depth,
        dt=(2.0 * math.pi / args.steps) if args.steps else None,
    )
    spec = SweepSpec(
        method=args.method,
        thetas=_grid_arg(args.thetas),
        couplings=_grid_arg(args.ws),
        widths=() if args.method == "jc-limit" else _grid_arg(args.lambdas),
        heom=heom_cfg,
    )
    rows = run_grid(spec, workers=args.workers)
    out = _out_path(args.out, f"sweep.{args.format}")
    write_table(rows, out, args.format)
    write_manifest(str(out) + ".manifest.json", [spec])
    bad = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {out}" + (f" ({bad} rows errored)" if bad else ""))
    return EXIT_CHECK_FAILED if bad else EXIT_OK


def _cmd_figure(args) -> int:
    figspec: FigureSpec = figure_preset(args.figure)
    rows = run_figure(figspec, workers=args.workers)
    out = _out_path(args.out, f"fig{args.figure}.{args.format}")
    write_table(rows, out, args.format)
    write_manifest(str(out) + ".manifest.json", list(figspec.panels))
    bad = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {out}" + (f" ({bad} rows errored)" if bad else ""))
    return EXIT_CHECK_FAILED if bad else EXIT_OK


def _cmd_validate(args) -> int:
    only = [tok for tok in (args.only or "").replace(" ", "").split(",") if tok] or None
    results = validate_mod.run(only=only, workers=args.workers)
    failures = [r for r in results if not r.passed]
    if failures:
        return _fail(
            "acceptance-criteria-failed",
            "; ".join(f"{r.cid}: {r.details}" for r in failures),
            failed=[r.cid for r in failures],
        )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gp-rwa":
            return _cmd_single(args, "rwa")
        if args.command == "gp-heom":
            return _cmd_single(args, "heom")
        if args.command == "gp-jc":
            return _cmd_single(args, "jc")
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "figure":
            return _cmd_figure(args)
        if args.command == "validate":
            return _cmd_validate(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConvergenceError, QuadratureError, ValidationError) as exc:
        return _fail(type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail("ValueError", str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
