"""Acceptance suite: the headline behaviors, each with pinned tolerances.

Each criterion is a standalone function returning a
:class:`CriterionResult`; the CLI ``validate`` subcommand and the test
suite both drive :func:`run`, which prints one pass/fail line per
criterion.  Heavy sweep tables (the two heatmap grids and the two
hierarchy line sweeps) are computed once and shared across criteria.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bath import BathParams
from .heom import HeomConfig, evolve_grid
from .phase import GpEngineConfig, bargmann_phase, unwrap_angles
from .results import angle_diff, wrap_angle
from .rwa import (
    THETA_CRITICAL,
    gp_jc_limit_grid,
    gp_rwa_closed,
    gp_rwa_closed_grid,
    rwa_trajectory,
)
from .sweep import THETA_LINE, figure_preset, run_figure

__all__ = ["CriterionResult", "CRITERIA", "run"]

# Pinned tolerances (A1-A10).
A1_THETAS = (math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2, 3 * math.pi / 4)
A1_TOL_CLOSED = 1e-6
A1_TOL_BARGMANN = 1e-3
A1_TOL_HEOM = 1e-3
A1_BUDGET_SECONDS = 60.0
A2_MIN_ORDER = 0.9
A2_SAMPLES = (250, 500, 1000, 2000, 4000)
A3_W_POINTS = 300
A3_JUMP_TOL = 0.05 * math.pi
A4_RANDOM_DRAWS = 10_000
A4_SEED = 20260810
A5_MONOTONE_SLACK = 1e-6
A6_THETA_POINTS = 50
A6_TOL = 0.02 * math.pi
A7_OVERLAP_FLOOR = 0.05
A7_JUMP_BOUND = 0.2 * math.pi
A8_TRACE_TOL = 1e-8
A8_HERM_TOL = 1e-9
A8_EIG_FLOOR = -1e-7
A9_TOL = 1e-4 * math.pi
A10_W_POINTS = 300


@dataclass
class CriterionResult:
    cid: str
    description: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        key_bits = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"[{self.cid}] {status} ({self.seconds:.1f}s) {self.description}: {key_bits}"


_CACHE: dict = {}


def _f1_rows(workers: int = 1):
    if "f1" not in _CACHE:
        _CACHE["f1"] = run_figure(figure_preset(1), workers)
    return _CACHE["f1"]


def _f4_rows(workers: int = 1):
    if "f4" not in _CACHE:
        _CACHE["f4"] = run_figure(figure_preset(4), workers)
    return _CACHE["f4"]


def _heom_theta_sweep(key: str, coupling: float, width: float, thetas):
    if key not in _CACHE:
        bath = BathParams(coupling, width)
        trajs = evolve_grid(list(thetas), bath, HeomConfig(), strict=False)
        results = [bargmann_phase(t) for t in trajs]
        _CACHE[key] = (trajs, results)
    return _CACHE[key]


def _a6_data():
    thetas = tuple(float(x) for x in np.linspace(0.0, math.pi, A6_THETA_POINTS + 2)[1:-1])
    return thetas, _heom_theta_sweep("a6", 0.05, 5.0, thetas)


def _a7_data():
    return THETA_LINE, _heom_theta_sweep("a7", 0.5, 0.05, THETA_LINE)


def criterion_a1(workers: int = 1) -> CriterionResult:
    """Unitary limit: every channel reproduces 2*pi*cos^2(theta/2) at W=0."""
    t0 = time.perf_counter()
    bath = BathParams(0.0, 0.05)
    worst = {"closed": 0.0, "bargmann": 0.0, "heom": 0.0}
    for theta in A1_THETAS:
        target = 2.0 * math.pi * math.cos(0.5 * theta) ** 2
        closed = gp_rwa_closed(theta, bath).require_phi()
        worst["closed"] = max(worst["closed"], abs(angle_diff(closed, target)))
        analytic = bargmann_phase(rwa_trajectory(theta, bath, 4000)).require_phi()
        worst["bargmann"] = max(worst["bargmann"], abs(angle_diff(analytic, target)))
    trajs = evolve_grid(list(A1_THETAS), bath, HeomConfig())
    for theta, traj in zip(A1_THETAS, trajs):
        target = 2.0 * math.pi * math.cos(0.5 * theta) ** 2
        numeric = bargmann_phase(traj).require_phi()
        worst["heom"] = max(worst["heom"], abs(angle_diff(numeric, target)))
    elapsed = time.perf_counter() - t0
    passed = (
        worst["closed"] <= A1_TOL_CLOSED
        and worst["bargmann"] <= A1_TOL_BARGMANN
        and worst["heom"] <= A1_TOL_HEOM
        and elapsed < A1_BUDGET_SECONDS
    )
    return CriterionResult(
        "A1", "unitary-limit oracle", passed,
        {
            "max_err_closed": f"{worst['closed']:.2e}",
            "max_err_bargmann": f"{worst['bargmann']:.2e}",
            "max_err_heom": f"{worst['heom']:.2e}",
            "budget_s": A1_BUDGET_SECONDS,
        },
        elapsed,
    )


def criterion_a2(workers: int = 1) -> CriterionResult:
    """Bargmann discretization: fitted convergence order >= 0.9."""
    t0 = time.perf_counter()
    bath = BathParams(0.5, 0.05)
    theta = math.pi / 3
    reference = gp_rwa_closed(theta, bath).require_phi()
    errs = []
    for n in A2_SAMPLES:
        phi = bargmann_phase(rwa_trajectory(theta, bath, n)).require_phi()
        errs.append(abs(angle_diff(phi, reference)))
    order = -float(np.polyfit(np.log(A2_SAMPLES), np.log(errs), 1)[0])
    passed = order >= A2_MIN_ORDER
    return CriterionResult(
        "A2", "Bargmann convergence order", passed,
        {"order": f"{order:.2f}", "errs": "[" + ", ".join(f"{e:.1e}" for e in errs) + "]"},
        time.perf_counter() - t0,
    )


def criterion_a3(workers: int = 1) -> CriterionResult:
    """A pi jump with an overlap sign change exists (non-Markovian RWA)."""
    t0 = time.perf_counter()
    ws = np.linspace(0.0, 1.5, A3_W_POINTS + 1)[1:]
    theta = math.pi / 3
    results = [gp_rwa_closed_grid([theta], BathParams(w, 0.05))[0] for w in ws]
    jump = _find_pi_jump(results, A3_JUMP_TOL)
    return CriterionResult(
        "A3", "nodal structure exists (RWA, lambda=0.05, theta=pi/3)",
        jump is not None,
        {"jump": jump or "none found"},
        time.perf_counter() - t0,
    )


def _find_pi_jump(results, tol: float):
    """First adjacent pair with an overlap sign change and |dphi| = pi +- tol."""
    for a, b in zip(results, results[1:]):
        if a.nodal or b.nodal:
            continue
        if a.overlap.real * b.overlap.real < 0.0:
            dphi = abs(angle_diff(b.phi, a.phi))
            if abs(dphi - math.pi) <= tol:
                return f"|dphi|={dphi / math.pi:.3f}pi"
    return None


def criterion_a4(workers: int = 1) -> CriterionResult:
    """No nodal point anywhere with theta >= 2*pi/3 (exclusion bound)."""
    t0 = time.perf_counter()
    offenders = 0
    checked = 0
    min_overlap_above = math.inf
    for row in _f1_rows(workers) + _f4_rows(workers):
        if row.theta >= THETA_CRITICAL:
            checked += 1
            if row.nodal or row.error:
                offenders += 1
            else:
                min_overlap_above = min(min_overlap_above, row.overlap_re)
    rng = np.random.default_rng(A4_SEED)
    thetas = rng.uniform(1e-3, math.pi - 1e-3, A4_RANDOM_DRAWS)
    couplings = rng.uniform(0.0, 1.5, A4_RANDOM_DRAWS)
    widths = np.exp(rng.uniform(math.log(0.01), math.log(5.0), A4_RANDOM_DRAWS))
    from .rwa import decay_envelope, _overlap_from_envelope  # draw check is closed form

    for th, w, lam in zip(thetas, couplings, widths):
        if th < THETA_CRITICAL:
            continue
        checked += 1
        bath = BathParams(float(w), float(lam))
        ov = _overlap_from_envelope(float(th), decay_envelope(bath.period, bath))
        if abs(ov) < 1e-8:
            offenders += 1
        else:
            min_overlap_above = min(min_overlap_above, ov)
    passed = offenders == 0 and min_overlap_above > 0.0
    return CriterionResult(
        "A4", "bound exclusion theta_C = 2pi/3", passed,
        {
            "points_above_bound": checked,
            "nodal_above_bound": offenders,
            "min_overlap_above": f"{min_overlap_above:.3e}",
        },
        time.perf_counter() - t0,
    )


def criterion_a5(workers: int = 1) -> CriterionResult:
    """Markovian grid: positive overlap and phase non-increasing in W."""
    t0 = time.perf_counter()
    rows = [r for r in _f1_rows(workers) if r.width == 5.0]
    min_overlap = min(r.overlap_re for r in rows)
    worst_increase = -math.inf
    by_theta: dict[float, list] = {}
    for r in rows:
        by_theta.setdefault(r.theta, []).append(r)
    for theta, series in by_theta.items():
        series.sort(key=lambda r: r.coupling)
        phis = unwrap_angles(np.array(
            [math.nan if r.phi_over_pi is None else r.phi_over_pi * math.pi for r in series]
        ))
        worst_increase = max(worst_increase, float(np.max(np.diff(phis))))
    passed = min_overlap > 0.0 and worst_increase <= A5_MONOTONE_SLACK
    return CriterionResult(
        "A5", "Markovian regularity (lambda=5)", passed,
        {"min_overlap": f"{min_overlap:.3e}", "worst_dphi_dW": f"{worst_increase:.2e}"},
        time.perf_counter() - t0,
    )


def criterion_a6(workers: int = 1) -> CriterionResult:
    """Weak-coupling agreement between the hierarchy and the closed form."""
    t0 = time.perf_counter()
    thetas, (trajs, results) = _a6_data()
    closed = gp_rwa_closed_grid(list(thetas), BathParams(0.05, 5.0))
    deltas = [
        abs(angle_diff(r.require_phi(), c.require_phi()))
        for r, c in zip(results, closed)
    ]
    worst = max(deltas)
    return CriterionResult(
        "A6", "weak-coupling agreement (lambda=5, W=0.05)", worst <= A6_TOL,
        {"max_dphi": f"{worst / math.pi:.4f}pi", "tol": f"{A6_TOL / math.pi:.2f}pi"},
        time.perf_counter() - t0,
    )


def criterion_a7(workers: int = 1) -> CriterionResult:
    """Strong-coupling non-Markovian sweep stays continuous and non-nodal."""
    t0 = time.perf_counter()
    thetas, (trajs, results) = _a7_data()
    min_overlap = min(r.overlap_abs for r in results)
    nodal_count = sum(r.nodal for r in results)
    phis = unwrap_angles(np.array([r.phi for r in results], dtype=float))
    max_jump = float(np.max(np.abs(np.diff(phis))))
    passed = (
        min_overlap > A7_OVERLAP_FLOOR and nodal_count == 0 and max_jump < A7_JUMP_BOUND
    )
    return CriterionResult(
        "A7", "non-RWA continuity (lambda=0.05, W=0.5)", passed,
        {
            "min_overlap_abs": f"{min_overlap:.4f}",
            "nodal_rows": nodal_count,
            "max_adjacent_dphi": f"{max_jump / math.pi:.4f}pi",
        },
        time.perf_counter() - t0,
    )


def criterion_a8(workers: int = 1) -> CriterionResult:
    """Hierarchy output stays a physical state at every sample."""
    t0 = time.perf_counter()
    worst = {"trace": 0.0, "herm": 0.0, "eig": 0.0}
    for key_data in (_a6_data(), _a7_data()):
        trajs, _ = key_data[1]
        for traj in trajs:
            phys = traj.physicality()
            worst["trace"] = max(worst["trace"], phys["max_trace_dev"])
            worst["herm"] = max(worst["herm"], traj.meta["herm_dev_raw"])
            worst["eig"] = min(worst.get("eig", 0.0), phys["min_eig"])
    passed = (
        worst["trace"] < A8_TRACE_TOL
        and worst["herm"] < A8_HERM_TOL
        and worst["eig"] >= A8_EIG_FLOOR
    )
    return CriterionResult(
        "A8", "hierarchy physicality", passed,
        {
            "max_trace_dev": f"{worst['trace']:.1e}",
            "max_herm_dev_raw": f"{worst['herm']:.1e}",
            "min_eig": f"{worst['eig']:.1e}",
        },
        time.perf_counter() - t0,
    )


def criterion_a9(workers: int = 1) -> CriterionResult:
    """Every hierarchy acceptance run certifies under depth+5, dt/2."""
    t0 = time.perf_counter()
    deltas = []
    for key_data in (_a6_data(), _a7_data()):
        trajs, _ = key_data[1]
        deltas.extend(t.meta["certificate"].delta_phi for t in trajs)
    f4_failures = sum(1 for r in _f4_rows(workers) if not r.converged or r.error)
    worst = max(deltas)
    passed = worst < A9_TOL and f4_failures == 0
    return CriterionResult(
        "A9", "hierarchy self-convergence", passed,
        {
            "max_cert_dphi": f"{worst / math.pi:.2e}pi",
            "tol": f"{A9_TOL / math.pi:.0e}pi",
            "f4_unconverged_rows": f4_failures,
        },
        time.perf_counter() - t0,
    )


def criterion_a10(workers: int = 1) -> CriterionResult:
    """Single-mode limit keeps the pi jump (theta = pi/4)."""
    t0 = time.perf_counter()
    ws = np.linspace(0.0, 1.5, A10_W_POINTS + 1)[1:]
    results = [gp_jc_limit_grid([math.pi / 4], float(w))[0] for w in ws]
    jump = _find_pi_jump(results, A3_JUMP_TOL)
    return CriterionResult(
        "A10", "single-mode-limit jump (theta=pi/4)", jump is not None,
        {"jump": jump or "none found"},
        time.perf_counter() - t0,
    )


CRITERIA = {
    "A1": criterion_a1,
    "A2": criterion_a2,
    "A3": criterion_a3,
    "A4": criterion_a4,
    "A5": criterion_a5,
    "A6": criterion_a6,
    "A7": criterion_a7,
    "A8": criterion_a8,
    "A9": criterion_a9,
    "A10": criterion_a10,
}


def run(only: list[str] | None = None, workers: int = 1, echo=print) -> list[CriterionResult]:
    """Run the (selected) acceptance criteria, one printed line each."""
    selected = list(CRITERIA) if not only else [c.upper() for c in only]
    unknown = [c for c in selected if c not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; available: {list(CRITERIA)}")
    results = []
    for cid in selected:
        res = CRITERIA[cid](workers)
        results.append(res)
        echo(res.line())
    return results
