"""Geometric phase of a dissipative qubit in a Lorentzian bosonic bath.

Three channels produce the phase over one system period:

* ``rwa``   - closed-form dynamics under the rotating-wave approximation,
* ``heom``  - exact dynamics from the auxiliary-operator hierarchy,
* ``phase`` - Bargmann-chain extraction from any sampled trajectory.

``sweep`` reproduces the reference parameter grids as deterministic CSV
tables and ``cli`` exposes everything as the ``qubit-gp`` command.
"""

from .algebra import (
    DensityDiagnostics,
    EigenPair2,
    ValidationError,
    eig_hermitian_2x2,
    inner,
    ket,
    projector,
    validate_density,
)
from .bath import BathParams, CorrelationFunction
from .heom import (
    ADOSet,
    BlowUpError,
    ConvergenceError,
    HeomConfig,
    auto_depth,
    certify_convergence,
    evolve,
    evolve_grid,
    evolve_rho,
    heom_rhs,
    init_ados,
    step_rk4,
)
from .phase import (
    GpEngineConfig,
    bargmann_phase,
    bargmann_phase_adaptive,
    detect_nodal,
    mixed_state_phase,
    unwrap_angles,
    unwrap_phase,
)
from .results import ConvergenceCertificate, GpMeta, GpResult, angle_diff, wrap_angle
from .rwa import (
    DampingBranch,
    EigenFrame,
    QuadratureConfig,
    QuadratureError,
    damping_branch,
    decay_envelope,
    eigensystem_rwa,
    final_overlap,
    gp_jc_limit,
    gp_rwa_closed,
    jc_trajectory,
    nodal_possible,
    rho_rwa,
    rwa_trajectory,
)
from .trajectory import Trajectory, read_trajectory_csv, write_trajectory_csv

__version__ = "0.1.0"

__all__ = [
    "BathParams",
    "CorrelationFunction",
    "Trajectory",
    "GpResult",
    "GpMeta",
    "ConvergenceCertificate",
    "ValidationError",
    "DensityDiagnostics",
    "EigenPair2",
    "EigenFrame",
    "DampingBranch",
    "QuadratureConfig",
    "QuadratureError",
    "HeomConfig",
    "GpEngineConfig",
    "ADOSet",
    "BlowUpError",
    "ConvergenceError",
    "ket",
    "projector",
    "inner",
    "validate_density",
    "eig_hermitian_2x2",
    "decay_envelope",
    "damping_branch",
    "rho_rwa",
    "eigensystem_rwa",
    "final_overlap",
    "gp_rwa_closed",
    "gp_jc_limit",
    "nodal_possible",
    "rwa_trajectory",
    "jc_trajectory",
    "init_ados",
    "heom_rhs",
    "step_rk4",
    "evolve",
    "evolve_rho",
    "evolve_grid",
    "certify_convergence",
    "auto_depth",
    "bargmann_phase",
    "bargmann_phase_adaptive",
    "mixed_state_phase",
    "detect_nodal",
    "unwrap_phase",
    "unwrap_angles",
    "wrap_angle",
    "angle_diff",
    "read_trajectory_csv",
    "write_trajectory_csv",
]
