"""Complex 2x2 Hermitian linear algebra for qubit density matrices.

Basis ordering is fixed everywhere in this package to {|1>, |0>}:
index 0 is the excited state |1>, index 1 is the ground state |0>.
Entry (0, 0) of a density matrix is therefore the excited-state
population.  Kets are length-2 complex arrays (c1, c0).

Eigendecomposition is closed form (trace/determinant), not iterative:
it is exact up to rounding and cheap enough for the solver inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KET_EXCITED",
    "KET_GROUND",
    "DEGENERACY_TOL",
    "ValidationError",
    "DensityDiagnostics",
    "EigenPair2",
    "ket",
    "projector",
    "inner",
    "validate_density",
    "check_density",
    "eig_hermitian_2x2",
    "eigh2_batch",
]

KET_EXCITED = np.array([1.0, 0.0], dtype=complex)  # |1>
KET_GROUND = np.array([0.0, 1.0], dtype=complex)   # |0>

# Below this eigenvalue gap the eigenvectors are ill-conditioned; callers
# decide policy (flag, skip, ...).
DEGENERACY_TOL = 1e-9

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when a state fails its structural invariants."""


def ket(c1: complex, c0: complex) -> np.ndarray:
    """Normalized ket with amplitude ``c1`` on |1> and ``c0`` on |0>."""
    v = np.array([c1, c0], dtype=complex)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValidationError("zero ket cannot be normalized")
    return v / n


def projector(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a unit ket."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugate linear in ``a`` and linear in ``b``."""
    return complex(np.vdot(a, b))


@dataclass(frozen=True)
class DensityDiagnostics:
    """Deviation report for a candidate density matrix (pure report, no verdict)."""

    herm_dev: float    # max |rho - rho^dagger| elementwise
    trace_dev: float   # |tr(rho) - 1|
    min_eig: float     # smaller eigenvalue of the Hermitian part
    finite: bool

    def ok(
        self,
        herm_tol: float = HERMITICITY_TOL,
        trace_tol: float = TRACE_TOL,
        psd_tol: float = POSITIVITY_TOL,
    ) -> bool:
        return (
            self.finite
            and self.herm_dev <= herm_tol
            and self.trace_dev <= trace_tol
            and self.min_eig >= -psd_tol
        )


@dataclass(frozen=True)
class EigenPair2:
    """Spectral decomposition of a 2x2 Hermitian unit-trace matrix.

    ``eps_plus >= eps_minus``, ``eps_plus + eps_minus = trace``; the
    eigenvectors are unit norm and mutually orthogonal.  The global phase
    of each eigenvector is not fixed by the contract.
    """

    eps_plus: float
    eps_minus: float
    v_plus: np.ndarray
    v_minus: np.ndarray
    degenerate: bool

    @property
    def gap(self) -> float:
        return self.eps_plus - self.eps_minus


def validate_density(rho: np.ndarray) -> DensityDiagnostics:
    """Measure how far ``rho`` is from a valid density matrix.

    Never raises: returns the raw deviations so callers can apply their
    own (source-dependent) tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {rho.shape}")
    finite = bool(np.all(np.isfinite(rho.real)) and np.all(np.isfinite(rho.imag)))
    if not finite:
        return DensityDiagnostics(np.inf, np.inf, -np.inf, False)
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    trace_dev = float(abs(rho[0, 0] + rho[1, 1] - 1.0))
    # Spectrum of the Hermitian part; for near-Hermitian input this is the
    # relevant positivity measure.
    h = 0.5 * (rho + rho.conj().T)
    mean = 0.5 * (h[0, 0].real + h[1, 1].real)
    r = np.hypot(0.5 * (h[0, 0].real - h[1, 1].real), abs(h[0, 1]))
    return DensityDiagnostics(herm_dev, trace_dev, float(mean - r), True)


def check_density(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = POSITIVITY_TOL,
) -> None:
    """Raise :class:`ValidationError` when ``rho`` violates the invariants."""
    diag = validate_density(rho)
    if not diag.finite:
        raise ValidationError("density matrix contains non-finite entries")
    if diag.herm_dev > herm_tol:
        raise ValidationError(f"Hermiticity deviation {diag.herm_dev:.3e} > {herm_tol:.1e}")
    if diag.trace_dev > trace_tol:
        raise ValidationError(f"trace deviation {diag.trace_dev:.3e} > {trace_tol:.1e}")
    if diag.min_eig < -psd_tol:
        raise ValidationError(f"minimum eigenvalue {diag.min_eig:.3e} < -{psd_tol:.1e}")


def eigh2_batch(rhos: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a stack of 2x2 Hermitian matrices.

    Parameters
    ----------
    rhos : (..., 2, 2) complex array, Hermitian along the last two axes.

    Returns
    -------
    eps : (..., 2) real, eigenvalues in descending order.
    vecs : (..., 2, 2) complex, ``vecs[..., :, k]`` is the k-th eigenvector.
    gap : (...,) real, ``eps[..., 0] - eps[..., 1]``.
    """
    rhos = np.asarray(rhos, dtype=complex)
    a = rhos[..., 0, 0].real
    d = rhos[..., 1, 1].real
    b = rhos[..., 0, 1]
    h = 0.5 * (a - d)
    r = np.hypot(h, np.abs(b))
    mean = 0.5 * (a + d)
    eps = np.stack([mean + r, mean - r], axis=-1)

    # (rho - eps_+) annihilates both (b, eps_+ - a) and (eps_+ - d, conj(b));
    # pick per element the better-conditioned candidate (larger norm).
    use_top = h >= 0.0
    v0 = np.where(use_top, eps[..., 0] - d, b)
    v1 = np.where(use_top, b.conj(), eps[..., 0] - a)
    norm = np.sqrt(np.abs(v0) ** 2 + np.abs(v1) ** 2)
    # Degenerate matrices (r == 0) leave both candidates null; any
    # orthonormal pair is then valid, use the basis.
    null = norm < 1e3 * np.finfo(float).tiny
    v0 = np.where(null, 1.0, v0)
    v1 = np.where(null, 0.0, v1)
    norm = np.where(null, 1.0, norm)
    v0 = v0 / norm
    v1 = v1 / norm
    vecs = np.empty(rhos.shape, dtype=complex)
    vecs[..., 0, 0] = v0
    vecs[..., 1, 0] = v1
    # Orthogonal complement is the second eigenvector of a Hermitian 2x2.
    vecs[..., 0, 1] = -v1.conj()
    vecs[..., 1, 1] = v0.conj()
    return eps, vecs, 2.0 * r


def eig_hermitian_2x2(rho: np.ndarray) -> EigenPair2:
    """Eigendecomposition of a validated 2x2 density matrix.

    Raises :class:`ValidationError` on non-Hermitian or non-finite input.
    """
    rho = np.asarray(rho, dtype=complex)
    check_density(rho)
    eps, vecs, gap = eigh2_batch(rho)
    return EigenPair2(
        eps_plus=float(eps[0]),
        eps_minus=float(eps[1]),
        v_plus=vecs[:, 0].copy(),
        v_minus=vecs[:, 1].copy(),
        degenerate=bool(gap < DEGENERACY_TOL),
    )
