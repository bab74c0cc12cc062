"""Deterministic parameter-grid sweeps and their CSV/JSON serialization.

A sweep evaluates one extraction method over theta/W/lambda grids and
yields one row per grid point in theta-major order (then W, then
lambda).  Rows serialize to a fixed CSV schema

    theta,W,lambda,method,phi_over_pi,overlap_re,overlap_im,overlap_abs,
    nodal,degenerate,converged

with all frequencies in units of omega0 and phi reported as phi/pi.
Nodal rows carry the sentinel string "undefined" in phi_over_pi; rows
whose solver failed carry "error" and converged=false (the run
continues).  Identical specs produce byte-identical files regardless of
worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from .bath import BathParams
from .heom import CERT_TOL_PHI, HeomConfig, evolve_grid
from .phase import GpEngineConfig, bargmann_phase
from .results import GpResult
from .rwa import (
    NODAL_TOL_CLOSED,
    QuadratureConfig,
    THETA_CRITICAL,
    gp_jc_limit_grid,
    gp_rwa_closed_grid,
    jc_trajectory,
    rwa_trajectory,
)

__all__ = [
    "METHODS",
    "SweepSpec",
    "SweepRow",
    "FigureSpec",
    "run_grid",
    "run_figure",
    "figure_preset",
    "write_table",
    "read_table",
    "write_manifest",
    "CSV_COLUMNS",
]

METHODS = ("rwa-closed", "rwa-bargmann", "heom", "jc-limit")

CSV_COLUMNS = [
    "theta", "W", "lambda", "method", "phi_over_pi",
    "overlap_re", "overlap_im", "overlap_abs",
    "nodal", "degenerate", "converged",
]

NODAL_SENTINEL = "undefined"
ERROR_SENTINEL = "error"

W_MAX = 1.5


@dataclass(frozen=True)
class SweepSpec:
    """One method over a theta x W x lambda grid.

    ``widths`` is empty for the jc-limit method (no bath width enters;
    rows serialize lambda = 0).  Engine settings ride along so a spec is
    a complete, reproducible description of the run.
    """

    method: str
    thetas: tuple[float, ...]
    couplings: tuple[float, ...]
    widths: tuple[float, ...] = ()
    label: str = ""
    n_intervals: int = 4000          # trajectory sampling for bargmann methods
    heom: HeomConfig = field(default_factory=HeomConfig)
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.thetas or not self.couplings:
            raise ValueError("theta and coupling grids must be non-empty")
        for th in self.thetas:
            if not (0.0 < th <= math.pi):
                raise ValueError(f"theta {th} outside (0, pi]")
        for w in self.couplings:
            if not (0.0 <= w <= W_MAX):
                raise ValueError(f"coupling {w} outside [0, {W_MAX}]")
        if self.method == "jc-limit":
            if self.widths:
                raise ValueError("jc-limit takes no width grid")
        else:
            if not self.widths:
                raise ValueError(f"method {self.method} needs a width grid")
            for lam in self.widths:
                if lam <= 0.0:
                    raise ValueError(f"width {lam} must be > 0")


@dataclass(frozen=True)
class SweepRow:
    theta: float
    coupling: float
    width: float          # 0.0 for jc-limit
    method: str
    phi_over_pi: float | None
    overlap_re: float
    overlap_im: float
    overlap_abs: float
    nodal: bool
    degenerate: bool
    converged: bool
    error: str = ""       # not part of the CSV schema; carried in JSON


@dataclass(frozen=True)
class FigureSpec:
    """A reference figure as an ordered set of sweep panels."""

    figure: int
    panels: tuple[SweepSpec, ...]


def _row_from_result(
    theta: float, coupling: float, width: float, method: str, res: GpResult,
    converged: bool,
) -> SweepRow:
    return SweepRow(
        theta=theta,
        coupling=coupling,
        width=width,
        method=method,
        phi_over_pi=res.phi_over_pi,
        overlap_re=float(res.overlap.real),
        overlap_im=float(res.overlap.imag),
        overlap_abs=res.overlap_abs,
        nodal=res.nodal,
        degenerate=res.degenerate,
        converged=converged,
    )


def _error_row(theta: float, coupling: float, width: float, method: str, exc: Exception) -> SweepRow:
    return SweepRow(
        theta=theta, coupling=coupling, width=width, method=method,
        phi_over_pi=None, overlap_re=math.nan, overlap_im=math.nan,
        overlap_abs=math.nan, nodal=False, degenerate=False, converged=False,
        error=f"{type(exc).__name__}: {exc}",
    )


def _group_task(args: tuple) -> list[SweepRow]:
    """Evaluate one (coupling, width) group across all thetas."""
    spec, coupling, width = args
    thetas = list(spec.thetas)
    try:
        if spec.method == "rwa-closed":
            bath = BathParams(coupling, width)
            results = gp_rwa_closed_grid(thetas, bath, spec.quad)
            return [
                _row_from_result(th, coupling, width, spec.method, r, r.meta.converged)
                for th, r in zip(thetas, results)
            ]
        if spec.method == "jc-limit":
            results = gp_jc_limit_grid(thetas, coupling, quad=spec.quad)
            return [
                _row_from_result(th, coupling, 0.0, spec.method, r, r.meta.converged)
                for th, r in zip(thetas, results)
            ]
        if spec.method == "rwa-bargmann":
            bath = BathParams(coupling, width)
            rows = []
            for th in thetas:
                traj = rwa_trajectory(th, bath, spec.n_intervals)
                res = bargmann_phase(traj)
                rows.append(_row_from_result(th, coupling, width, spec.method, res, res.meta.converged))
            return rows
        # heom: one batched basis evolution per group, certificate per theta
        bath = BathParams(coupling, width)
        trajs = evolve_grid(thetas, bath, spec.heom, strict=False)
        rows = []
        for th, traj in zip(thetas, trajs):
            try:
                res = bargmann_phase(traj)
                cert = traj.meta.get("certificate")
                ok = res.meta.converged and (cert is None or cert.passed)
                rows.append(_row_from_result(th, coupling, width, spec.method, res, ok))
            except Exception as exc:  # per-row capture, run continues
                rows.append(_error_row(th, coupling, width, spec.method, exc))
        return rows
    except Exception as exc:  # whole-group failure: every row records it
        width_out = 0.0 if spec.method == "jc-limit" else width
        return [_error_row(th, coupling, width_out, spec.method, exc) for th in thetas]


def run_grid(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """All grid rows of one spec, theta-major (then W, then lambda).

    Grid points are grouped by (coupling, width); groups may run in a
    process pool.  Results are reassembled in grid order, so the output
    is identical for any worker count.
    """
    widths = spec.widths if spec.method != "jc-limit" else (0.0,)
    tasks = [(spec, w, lam) for w in spec.couplings for lam in widths]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            group_rows = list(pool.map(_group_task, tasks, chunksize=1))
    else:
        group_rows = [_group_task(t) for t in tasks]
    out: list[SweepRow] = []
    n_lam = len(widths)
    for i_th in range(len(spec.thetas)):
        for i_w in range(len(spec.couplings)):
            for i_lam in range(n_lam):
                out.append(group_rows[i_w * n_lam + i_lam][i_th])
    return out


def run_figure(figspec: FigureSpec, workers: int = 1) -> list[SweepRow]:
    """Concatenated rows of all panels, in panel order."""
    rows: list[SweepRow] = []
    for panel in figspec.panels:
        rows.extend(run_grid(panel, workers))
    return rows


def _interior(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(lo, hi, n + 2)[1:-1])


def _half_open(hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.0, hi, n + 1)[1:])


THETA_HEAT = _interior(0.0, math.pi, 100)   # 100 points inside (0, pi)
W_HEAT = _half_open(W_MAX, 100)             # 100 points inside (0, 1.5]
THETA_LINE = _interior(0.0, math.pi, 200)
W_LINE = _half_open(W_MAX, 200)

# Coarser stepping for the heatmap-sized hierarchy sweep: the phase error
# is truncation-dominated (RK4 step error measured ~1e-10 pi at T/2000),
# and the refinement certificate still checks dt/2 on every cell.
_HEOM_HEAT = HeomConfig(dt=2.0 * math.pi / 2000.0)


def figure_preset(figure: int) -> FigureSpec:
    """Exact parameter grids of the six reference figures."""
    if figure == 1:
        return FigureSpec(1, (
            SweepSpec("rwa-closed", THETA_HEAT, W_HEAT, (5.0, 0.05), label="f1"),
        ))
    if figure == 2:
        return FigureSpec(2, (
            SweepSpec("rwa-closed", THETA_LINE, (0.1,), (0.05,), label="f2a"),
            SweepSpec("rwa-closed", THETA_LINE, (0.5,), (0.05,), label="f2b"),
            SweepSpec("rwa-closed", (math.pi / 3,), W_LINE, (0.05,), label="f2c"),
            SweepSpec("rwa-closed", (math.pi / 10,), W_LINE, (0.05,), label="f2d"),
        ))
    if figure == 3:
        return FigureSpec(3, (
            SweepSpec("jc-limit", (math.pi / 4,), W_LINE, label="f3"),
        ))
    if figure == 4:
        return FigureSpec(4, (
            SweepSpec("heom", THETA_HEAT, W_HEAT, (5.0, 0.05), label="f4", heom=_HEOM_HEAT),
        ))
    if figure == 5:
        return FigureSpec(5, (
            SweepSpec("heom", THETA_LINE, (0.5,), (0.05,), label="f5"),
        ))
    if figure == 6:
        panels = []
        for lam in (5.0, 0.05):
            for w in (0.05, 0.5):
                tag = f"f6-lam{lam}-w{w}"
                panels.append(SweepSpec("rwa-closed", THETA_LINE, (w,), (lam,), label=tag))
                panels.append(SweepSpec("heom", THETA_LINE, (w,), (lam,), label=tag))
        return FigureSpec(6, tuple(panels))
    raise ValueError(f"figure id must be 1..6, got {figure}")


def _fmt(value: float) -> str:
    return repr(float(value))


def _row_record(row: SweepRow) -> dict:
    if row.error:
        phi = ERROR_SENTINEL
    elif row.phi_over_pi is None:
        phi = NODAL_SENTINEL
    else:
        phi = row.phi_over_pi
    return {
        "theta": row.theta,
        "W": row.coupling,
        "lambda": row.width,
        "method": row.method,
        "phi_over_pi": phi,
        "overlap_re": row.overlap_re,
        "overlap_im": row.overlap_im,
        "overlap_abs": row.overlap_abs,
        "nodal": row.nodal,
        "degenerate": row.degenerate,
        "converged": row.converged,
    }


def write_table(rows: list[SweepRow], path: str | Path, fmt: str = "csv") -> None:
    """Serialize rows; identical inputs yield byte-identical files."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            fh.write("# units: theta [rad]; W, lambda [omega0]; phi as phi/pi; basis {|1>,|0>}\n")
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                rec = _row_record(row)
                writer.writerow([
                    _fmt(rec["theta"]), _fmt(rec["W"]), _fmt(rec["lambda"]), rec["method"],
                    rec["phi_over_pi"] if isinstance(rec["phi_over_pi"], str) else _fmt(rec["phi_over_pi"]),
                    _fmt(rec["overlap_re"]), _fmt(rec["overlap_im"]), _fmt(rec["overlap_abs"]),
                    str(rec["nodal"]).lower(), str(rec["degenerate"]).lower(),
                    str(rec["converged"]).lower(),
                ])
    elif fmt == "json":
        records = [_row_record(r) | ({"error": r.error} if r.error else {}) for r in rows]
        with path.open("w") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"format must be csv or json, got {fmt!r}")


def read_table(path: str | Path) -> list[SweepRow]:
    """Read back a CSV table written by :func:`write_table`."""
    path = Path(path)
    rows: list[SweepRow] = []
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            fh.seek(0)
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for rec in reader:
            raw_phi = rec["phi_over_pi"]
            error = ""
            if raw_phi == NODAL_SENTINEL:
                phi = None
            elif raw_phi == ERROR_SENTINEL:
                phi = None
                error = "error"
            else:
                phi = float(raw_phi)
            rows.append(SweepRow(
                theta=float(rec["theta"]),
                coupling=float(rec["W"]),
                width=float(rec["lambda"]),
                method=rec["method"],
                phi_over_pi=phi,
                overlap_re=float(rec["overlap_re"]),
                overlap_im=float(rec["overlap_im"]),
                overlap_abs=float(rec["overlap_abs"]),
                nodal=rec["nodal"] == "true",
                degenerate=rec["degenerate"] == "true",
                converged=rec["converged"] == "true",
                error=error,
            ))
    return rows


def _spec_record(spec: SweepSpec) -> dict:
    return {
        "method": spec.method,
        "label": spec.label,
        "thetas": list(spec.thetas),
        "couplings": list(spec.couplings),
        "widths": list(spec.widths),
        "n_intervals": spec.n_intervals,
        "heom": {
            "depth": spec.heom.depth,
            "dt": spec.heom.dt,
            "sample_stride": spec.heom.sample_stride,
            "certify": spec.heom.certify,
            "tol_phi": spec.heom.tol_phi,
            "depth_step": spec.heom.depth_step,
        },
        "quadrature": {
            "n": spec.quad.n,
            "rtol": spec.quad.rtol,
            "n_max": spec.quad.n_max,
            "nodal_tol": spec.quad.nodal_tol,
        },
    }


def write_manifest(path: str | Path, specs: list[SweepSpec], extra: dict | None = None) -> None:
    """Run manifest: configs and tolerances behind a table, for provenance."""
    payload = {
        "version": _pkg_version,
        "units": "omega0 = 1",
        "tolerances": {
            "nodal_closed_form": NODAL_TOL_CLOSED,
            "nodal_engine": GpEngineConfig().nodal_tol,
            "certificate_phi": CERT_TOL_PHI,
            "theta_critical": THETA_CRITICAL,
        },
        "specs": [_spec_record(s) for s in specs],
    }
    if extra:
        payload.update(extra)
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
