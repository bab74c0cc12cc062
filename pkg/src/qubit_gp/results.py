"""Result containers shared by the analytic and numerical phase channels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "TWO_PI",
    "wrap_angle",
    "angle_diff",
    "GpMeta",
    "GpResult",
    "ConvergenceCertificate",
]

TWO_PI = 2.0 * math.pi


def wrap_angle(x: float) -> float:
    """Reduce an angle to the principal branch (-pi, pi]."""
    m = math.fmod(x, TWO_PI)
    if m <= -math.pi:
        m += TWO_PI
    elif m > math.pi:
        m -= TWO_PI
    return m


def angle_diff(a: float, b: float) -> float:
    """Signed difference a - b wrapped to (-pi, pi]."""
    return wrap_angle(a - b)


@dataclass
class GpMeta:
    """Convergence record attached to a geometric-phase result."""

    method: str = ""
    n_samples: int = 0            # time-grid intervals used by the extractor
    delta: float = math.nan       # phase change under the last refinement
    converged: bool = True
    branch_weights: tuple[float, ...] = ()
    extra: dict = field(default_factory=dict)


@dataclass
class GpResult:
    """Geometric phase of one evolution over [0, T].

    ``phi`` is the principal value in (-pi, pi], or ``None`` at a nodal
    point where the phase is undefined.  ``overlap`` is <psi(0)|psi(T)>
    on the dominant eigenbranch, gauge-fixed so that the ground-state
    amplitude of each endpoint eigenvector is real and non-negative
    (the modulus is gauge free).  ``nodal`` is set iff |overlap| fell
    below the nodal tolerance of the producing channel.
    """

    phi: float | None
    overlap: complex
    nodal: bool
    degenerate: bool
    meta: GpMeta = field(default_factory=GpMeta)

    @property
    def overlap_abs(self) -> float:
        return abs(self.overlap)

    @property
    def phi_over_pi(self) -> float | None:
        return None if self.phi is None else self.phi / math.pi

    def require_phi(self) -> float:
        if self.phi is None:
            raise ValueError("geometric phase undefined (nodal point)")
        return self.phi


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Refinement audit of a hierarchy run: depth+5 and dt/2 rerun deltas."""

    depth: int
    depth_refined: int
    dt: float
    dt_refined: float
    delta_phi: float        # |wrap(phi_base - phi_refined)|
    max_state_dev: float    # max elementwise |rho(t) - rho_refined(t)|
    tol_phi: float

    @property
    def passed(self) -> bool:
        return self.delta_phi < self.tol_phi
