"""Geometric phase of a sampled trajectory via Bargmann-invariant products.

The extractor never differentiates eigenvectors: the phase comes from the
argument of the gauge-free chain product

    <psi(0)|psi(T)> * prod_i <psi(t_i)|psi(t_{i-1})>,

where |psi(t)> follows one eigenbranch of the density matrix.  Branches
are chained by maximal overlap with the previous sample, not by
eigenvalue order, so they stay continuous through eigenvalue crossings;
every eigenvector enters the product once as bra and once as ket, which
cancels the arbitrary per-sample phases of the eigensolver.

For a mixed initial state each branch contributes its own chain product,
weighted by sqrt(eps_i(0) * eps_i(T)); a pure start reduces exactly to
the single dominant chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import DEGENERACY_TOL, ValidationError, eigh2_batch
from .results import GpMeta, GpResult, wrap_angle
from .trajectory import Trajectory

__all__ = [
    "GpEngineConfig",
    "bargmann_phase",
    "bargmann_phase_adaptive",
    "mixed_state_phase",
    "detect_nodal",
    "unwrap_angles",
    "unwrap_phase",
]

NODAL_TOL_ENGINE = 1e-6

# Worst acceptable sample deviations per producing channel.
_SOURCE_TOLS = {
    "rwa": {"herm": 1e-12, "trace": 1e-10, "psd": 1e-10},
    "jc": {"herm": 1e-12, "trace": 1e-10, "psd": 1e-10},
    "heom": {"herm": 1e-9, "trace": 1e-8, "psd": 1e-7},
    "external": {"herm": 1e-9, "trace": 1e-8, "psd": 1e-7},
}


@dataclass(frozen=True)
class GpEngineConfig:
    nodal_tol: float = NODAL_TOL_ENGINE
    degeneracy_tol: float = DEGENERACY_TOL
    purity_tol: float = 1e-9
    refine_tol: float = 1e-4   # |phi(N) - phi(N/2)| target for `converged`
    validate_states: bool = True


def _check_states(traj: Trajectory) -> None:
    tols = _SOURCE_TOLS.get(traj.source, _SOURCE_TOLS["external"])
    phys = traj.physicality()
    if phys["max_herm_dev"] > tols["herm"]:
        raise ValidationError(
            f"{traj.source} trajectory Hermiticity deviation {phys['max_herm_dev']:.3e}"
        )
    if phys["max_trace_dev"] > tols["trace"]:
        raise ValidationError(
            f"{traj.source} trajectory trace deviation {phys['max_trace_dev']:.3e}"
        )
    if phys["min_eig"] < -tols["psd"]:
        raise ValidationError(
            f"{traj.source} trajectory minimum eigenvalue {phys['min_eig']:.3e}"
        )


@dataclass
class _Chains:
    """Branch-tracked eigendecomposition of a trajectory."""

    eps: np.ndarray        # (S+1, 2) eigenvalues along each tracked chain
    links: np.ndarray      # (S, 2) consecutive overlaps along each chain
    v_first: np.ndarray    # (2, 2) eigenvectors at t=0, column per chain
    v_last: np.ndarray     # (2, 2) eigenvectors at t=T, column per chain
    min_gap: float
    min_link: float


def _track_chains(states: np.ndarray) -> _Chains:
    eps, vecs, gap = eigh2_batch(states)
    # Chain links use the later sample as bra: ov[t][j, k] = <v_j(t+1)|v_k(t)>.
    ov = np.einsum("tij,tik->tjk", vecs[1:].conj(), vecs[:-1])
    keep = np.abs(ov[:, 0, 0]) ** 2 + np.abs(ov[:, 1, 1]) ** 2
    cross = np.abs(ov[:, 0, 1]) ** 2 + np.abs(ov[:, 1, 0]) ** 2
    swap = cross > keep
    # Chain-0 branch index at each sample = parity of swaps so far.
    parity = np.zeros(states.shape[0], dtype=np.intp)
    parity[1:] = np.cumsum(swap) & 1
    other = 1 - parity
    s_idx = np.arange(states.shape[0] - 1)
    links = np.stack(
        [ov[s_idx, parity[1:], parity[:-1]], ov[s_idx, other[1:], other[:-1]]],
        axis=1,
    )
    t_idx = np.arange(states.shape[0])
    eps_chains = np.stack([eps[t_idx, parity], eps[t_idx, other]], axis=1)
    return _Chains(
        eps=eps_chains,
        links=links,
        v_first=np.stack([vecs[0][:, parity[0]], vecs[0][:, other[0]]], axis=1),
        v_last=np.stack([vecs[-1][:, parity[-1]], vecs[-1][:, other[-1]]], axis=1),
        min_gap=float(np.min(gap)),
        min_link=float(np.min(np.abs(links[:, 0]))) if links.size else 1.0,
    )


def _canonical_gauge(v: np.ndarray) -> np.ndarray:
    """Rotate a ket so its ground-state amplitude is real and >= 0."""
    anchor = v[1] if abs(v[1]) > 1e-12 else v[0]
    ph = anchor / abs(anchor)
    return v * np.conj(ph)


def _chain_product(ch: _Chains, chain: int) -> tuple[complex, complex]:
    """(closure overlap, full Bargmann product) for one tracked chain."""
    closure = complex(np.vdot(ch.v_first[:, chain], ch.v_last[:, chain]))
    return closure, closure * complex(np.prod(ch.links[:, chain]))


def _gauged_overlap(ch: _Chains, chain: int) -> complex:
    return complex(
        np.vdot(_canonical_gauge(ch.v_first[:, chain]), _canonical_gauge(ch.v_last[:, chain]))
    )


def _phi_once(traj: Trajectory, cfg: GpEngineConfig, mixed: bool) -> tuple[float | None, GpResult]:
    """One extraction pass at the trajectory's own resolution."""
    ch = _track_chains(traj.states)
    degenerate = ch.min_gap < cfg.degeneracy_tol or ch.min_link <= 0.0
    if mixed:
        # Eigenvalues of an exactly pure state carry O(eps) rounding noise;
        # clip so zero-weight branches drop out identically.
        eps0 = np.where(ch.eps[0] < 1e-12, 0.0, ch.eps[0])
        eps_t = np.where(ch.eps[-1] < 1e-12, 0.0, ch.eps[-1])
        w = np.sqrt(eps0 * eps_t)
        _, product0 = _chain_product(ch, 0)
        if w[1] == 0.0:
            total = product0  # exact reduction to the pure-start chain
        else:
            _, product1 = _chain_product(ch, 1)
            total = w[0] * product0 + w[1] * product1
        overlap = _gauged_overlap(ch, 0)
        nodal = abs(overlap) < cfg.nodal_tol or abs(total) < cfg.nodal_tol
        phi = None if nodal else float(np.angle(total))
        weights = (float(w[0]), float(w[1]))
        if ch.eps[0, 0] - ch.eps[0, 1] < cfg.degeneracy_tol:
            degenerate = True  # ambiguous branch assignment at t = 0
    else:
        _, product = _chain_product(ch, 0)
        overlap = _gauged_overlap(ch, 0)
        nodal = abs(overlap) < cfg.nodal_tol
        phi = None if nodal else float(np.angle(product))
        weights = (1.0,)
    result = GpResult(
        phi=phi,
        overlap=overlap,
        nodal=nodal,
        degenerate=degenerate,
        meta=GpMeta(
            method="bargmann-mixed" if mixed else "bargmann",
            n_samples=traj.n_intervals,
            branch_weights=weights,
            extra={"min_gap": ch.min_gap, "min_link": ch.min_link},
        ),
    )
    return phi, result


def _extract(traj: Trajectory, cfg: GpEngineConfig, mixed: bool) -> GpResult:
    if cfg.validate_states:
        _check_states(traj)
    phi, result = _phi_once(traj, cfg, mixed)
    # Discretization estimate from the trajectory's own half grid.
    if phi is not None and traj.n_intervals % 2 == 0:
        phi_half, _ = _phi_once(traj.subsample(2), cfg, mixed)
        if phi_half is not None:
            result.meta.delta = abs(wrap_angle(phi - phi_half))
            result.meta.converged = result.meta.delta < cfg.refine_tol
    return result


def bargmann_phase(traj: Trajectory, config: GpEngineConfig | None = None) -> GpResult:
    """Geometric phase of a pure-start trajectory from its Bargmann chain.

    The initial state must be pure (dominant eigenvalue within 1e-9 of
    one); for a genuinely mixed start use :func:`mixed_state_phase`.
    A degeneracy met along the branch flags the result rather than
    raising; a vanishing endpoint overlap yields a nodal result with
    ``phi=None``.
    """
    cfg = config or GpEngineConfig()
    eps0, _, _ = eigh2_batch(traj.states[0])
    if eps0[0] < 1.0 - cfg.purity_tol:
        raise ValidationError(
            f"initial state is mixed (eps_plus={eps0[0]:.6f}); use mixed_state_phase"
        )
    return _extract(traj, cfg, mixed=False)


def mixed_state_phase(traj: Trajectory, config: GpEngineConfig | None = None) -> GpResult:
    """Eigenvalue-weighted geometric phase for an arbitrary initial state.

    Weighted sum over both tracked eigenbranches with weights
    sqrt(eps_i(0) eps_i(T)); reduces exactly to :func:`bargmann_phase`
    when the start is pure (the second branch has weight zero).  A
    degenerate start (maximally mixed) is flagged, not resolved.
    """
    return _extract(traj, config or GpEngineConfig(), mixed=True)


def bargmann_phase_adaptive(
    sampler,
    n0: int = 4000,
    tol: float = 1e-4,
    n_max: int = 64000,
    config: GpEngineConfig | None = None,
) -> GpResult:
    """Resample-and-double until the phase moves less than ``tol``.

    ``sampler(n)`` must return the trajectory at ``n`` intervals; the
    doubling uses the previous resolution as its error estimate, so the
    returned meta.delta is a direct |phi(2N) - phi(N)|.
    """
    cfg = config or GpEngineConfig()
    n = n0
    prev: GpResult | None = None
    while True:
        res = _extract(sampler(n), cfg, mixed=False)
        if prev is not None and res.phi is not None and prev.phi is not None:
            res.meta.delta = abs(wrap_angle(res.phi - prev.phi))
            res.meta.converged = res.meta.delta < tol
            if res.meta.converged:
                return res
        if res.phi is None:
            return res  # nodal: nothing to refine
        if 2 * n > n_max:
            res.meta.converged = False
            return res
        prev = res
        n *= 2


def detect_nodal(result: GpResult, tol: float = NODAL_TOL_ENGINE) -> bool:
    """Whether the endpoint overlap is too small for the phase to be defined."""
    return abs(result.overlap) < tol


def unwrap_angles(phis: np.ndarray) -> np.ndarray:
    """Remove 2*pi jumps from an angle series; NaN entries split segments.

    Each segment starts from its first principal value; inside a segment
    consecutive differences are wrapped to (-pi, pi] before accumulation,
    so removable 2*pi wraps vanish while genuine pi jumps survive.
    """
    phis = np.asarray(phis, dtype=float)
    out = np.full_like(phis, np.nan)
    in_segment = False
    for i in range(phis.size):
        if math.isnan(phis[i]):
            in_segment = False
        elif not in_segment:
            out[i] = phis[i]
            in_segment = True
        else:
            out[i] = out[i - 1] + wrap_angle(phis[i] - phis[i - 1])
    return out


def unwrap_phase(series: list[GpResult]) -> np.ndarray:
    """Unwrapped phases of a 1-D sweep; nodal entries become NaN."""
    phis = np.array(
        [math.nan if r.phi is None else r.phi for r in series], dtype=float
    )
    return unwrap_angles(phis)
