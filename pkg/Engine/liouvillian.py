"""
Liouvillian assembly and steady state
Combines the unitary part with the dissipator blocks and solves L rho = 0
with unit trace, including the degenerate-kernel case.
"""

import logging
from typing import Iterable, Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from config import settings
from dissipators import trace_violation
from errors import DimensionError, SolverError, StateValidationError
from models import DissipatorBlock, Liouvillian, StateDiagnostics, SteadyState, Tolerances

logger = logging.getLogger(__name__)

KERNEL_RATE_FRACTION = 1e-2
KERNEL_ROUNDOFF = 64.0


# ============================================
# Assembly
# ============================================

def identity_vector(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex).ravel(order="F")


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).ravel(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec).reshape((dim, dim), order="F")


def unitary_superop(h) -> sp.csr_matrix:
    """-i [H, rho] for column stacking: -i (I kron H - H^T kron I)."""
    h = sp.csr_matrix(h, dtype=complex)
    eye = sp.identity(h.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(eye, h) - sp.kron(h.T, eye))).tocsr()


def assemble(h, blocks: Iterable[DissipatorBlock]) -> Liouvillian:
    """
    Full Liouvillian -i[H, .] + sum of dissipator blocks

    Args:
        h: Hamiltonian in the basis the blocks were built in (dense or sparse)
        blocks: Dissipator blocks

    Raises:
        DimensionError: If a block does not match the Hamiltonian
    """
    if h.shape[0] != h.shape[1]:
        raise DimensionError("Hamiltonian must be square", details={"shape": list(h.shape)})
    dim = h.shape[0]
    blocks = tuple(blocks)
    superop = unitary_superop(h)
    for block in blocks:
        if block.superop.shape != (dim * dim, dim * dim):
            raise DimensionError(
                f"Block '{block.label}' has shape {block.superop.shape}, expected {(dim * dim, dim * dim)}",
                details={"label": block.label},
            )
        superop = superop + block.superop
    superop = superop.tocsr()

    violation = trace_violation(superop, dim)
    if violation > 1e-9 * max(1.0, spla.norm(superop)):
        logger.warning(f"Liouvillian does not preserve trace (max deviation {violation:.3e})")
    logger.debug(f"Assembled Liouvillian: d={dim}, nnz={superop.nnz}, density={superop.nnz / (dim ** 4):.3%}")
    return Liouvillian(superop=superop, dim=dim, blocks=blocks)


# ============================================
# Validation
# ============================================

def validate(rho: np.ndarray, tolerances: Optional[Tolerances] = None) -> StateDiagnostics:
    """Trace, hermiticity and positivity of a density matrix against tolerances."""
    tol = tolerances or Tolerances.from_settings(settings)
    rho = np.asarray(rho, dtype=complex)
    trace_dev = float(abs(np.trace(rho) - 1.0))
    hermiticity_dev = float(np.abs(rho - rho.conj().T).max())
    min_eigenvalue = float(la.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    passed = trace_dev <= tol.trace and hermiticity_dev <= tol.hermiticity and min_eigenvalue >= -tol.positivity
    return StateDiagnostics(trace_dev, hermiticity_dev, min_eigenvalue, passed)


# ============================================
# Solvers
# ============================================

def _ground_state(dim: int) -> np.ndarray:
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[0, 0] = 1.0
    return rho0


def _bordered_solve(superop: sp.csr_matrix, dim: int) -> Optional[np.ndarray]:
    """Solve [[L, t], [t^T, 0]] [x; mu] = [0; 1]; None if the system is singular."""
    t = identity_vector(dim).reshape(-1, 1)
    lhs = sp.bmat([[superop, sp.csr_matrix(t)], [sp.csr_matrix(t.T), None]], format="csc")
    rhs = np.zeros(dim * dim + 1, dtype=complex)
    rhs[-1] = 1.0
    try:
        lu = spla.splu(lhs)
    except RuntimeError as exc:
        logger.debug(f"Bordered system is singular: {exc}")
        return None
    return lu.solve(rhs)[:-1]


def _inverse_power(superop: sp.csr_matrix, dim: int, initial: np.ndarray) -> np.ndarray:
    """Shifted inverse power iteration toward the eigenvalue closest to zero."""
    n = dim * dim
    shift = settings.INVERSE_POWER_SHIFT * max(1.0, spla.norm(superop))
    lu = spla.splu((superop - shift * sp.identity(n, dtype=complex, format="csr")).tocsc())
    t = identity_vector(dim)
    x = vectorize(initial)
    for iteration in range(settings.INVERSE_POWER_MAXITER):
        y = lu.solve(x)
        y = y / (t @ y)
        if np.abs(y - x).max() < settings.INVERSE_POWER_TOL:
            logger.debug(f"Inverse power converged after {iteration + 1} iterations")
            return y
        x = y
    logger.warning("Inverse power iteration hit the iteration cap")
    return x


def kernel_cutoff(superop: sp.csr_matrix, sigma_max: float, kernel_tol: float) -> float:
    """
    Singular-value threshold below which a Liouvillian mode counts as stationary

    The unitary part sets sigma_max at the eV scale while dissipative rates
    can be many orders smaller, so the relative cutoff kernel_tol * sigma_max
    is capped at a fraction of the slowest nonzero decay rate (the real
    diagonal of L). The cutoff never drops below the round-off floor.
    """
    decay = np.abs(superop.diagonal().real)
    decay = decay[decay > 0]
    cutoff = kernel_tol * sigma_max
    if decay.size:
        cutoff = min(cutoff, KERNEL_RATE_FRACTION * float(decay.min()))
    return max(cutoff, KERNEL_ROUNDOFF * np.finfo(float).eps * sigma_max)


def _degenerate_solve(superop: sp.csr_matrix, dim: int, initial: np.ndarray, kernel_tol: float):
    """
    Right and left kernels, biorthogonalised, applied to the initial state

    Returns:
        (vec(rho), kernel dimension)
    """
    if dim > settings.DENSE_KERNEL_MAX_DIM:
        raise SolverError(
            f"Degenerate kernel at d={dim} exceeds the dense kernel cap {settings.DENSE_KERNEL_MAX_DIM}",
            details={"dim": dim},
        )
    u, s, vh = la.svd(superop.toarray())
    cutoff = kernel_cutoff(superop, float(s[0]), kernel_tol)
    stationary = s <= cutoff
    k = int(stationary.sum())
    if k == 0:
        raise SolverError(
            "Liouvillian has no stationary mode below the kernel cutoff",
            details={"cutoff": cutoff, "smallest_singular_value": float(s[-1])},
        )
    right = vh[stationary].conj().T
    left = u[:, stationary]
    gap = float(s[-k - 1]) if k < s.size else 0.0
    logger.debug(f"Kernel dimension {k} (cutoff {cutoff:.3e}, next singular value {gap:.3e})")
    overlap = left.conj().T @ right
    if np.linalg.cond(overlap) > 1e12:
        raise SolverError("Kernel biorthogonalisation failed (non-diagonalisable Liouvillian?)", details={"kernel_dim": k})
    coeffs = np.linalg.solve(overlap, left.conj().T @ vectorize(initial))
    x = right @ coeffs
    x = x / (identity_vector(dim) @ x)
    return x, k


def steady_state(
    liouvillian: Liouvillian,
    initial: Optional[np.ndarray] = None,
    tolerances: Optional[Tolerances] = None,
) -> SteadyState:
    """
    Steady state of a trace-preserving Liouvillian

    A bordered linear system fixes unit trace for d up to the direct-solver
    cap; larger systems use shifted inverse power. When the bordered system
    is singular or its solution fails the residual check, the kernel is
    degenerate and the state is the projection of `initial` (default: the
    global ground state) onto it.

    Args:
        liouvillian: Assembled Liouvillian
        initial: Initial density matrix in the same basis, used only for
            degenerate kernels
        tolerances: Solver and validation tolerances

    Returns:
        SteadyState with the Hermitised density matrix and its diagnostics

    Raises:
        SolverError: If no solution meets the residual tolerance
        StateValidationError: If the state is not a valid density matrix
    """
    tol = tolerances or Tolerances.from_settings(settings)
    dim = liouvillian.dim
    superop = liouvillian.superop
    rho0 = _ground_state(dim) if initial is None else np.asarray(initial, dtype=complex)
    scale = spla.norm(superop)

    def acceptable(vec: Optional[np.ndarray]) -> bool:
        if vec is None or not np.all(np.isfinite(vec)):
            return False
        # a density matrix has no element larger than one
        if np.abs(vec).max() > 1.0 + 1e-6:
            return False
        return np.linalg.norm(superop @ vec) <= tol.residual * scale

    kernel_dim, method = 1, "bordered"
    if dim <= settings.DIRECT_SOLVER_MAX_DIM:
        x = _bordered_solve(superop, dim)
        if not acceptable(x):
            logger.warning(f"Bordered solve failed at d={dim}; treating the kernel as degenerate")
            x, kernel_dim = _degenerate_solve(superop, dim, rho0, tol.kernel)
            method = "kernel"
    else:
        x = _inverse_power(superop, dim, np.eye(dim, dtype=complex) / dim)
        method = "inverse_power"

    residual = float(np.linalg.norm(superop @ x))
    if residual > tol.residual * scale:
        raise SolverError(
            f"Steady-state residual {residual:.3e} exceeds {tol.residual:.1e} * ||L||",
            details={"residual": residual, "norm": float(scale), "method": method},
        )

    rho = unvectorize(x, dim)
    logger.debug(f"Raw hermiticity deviation {np.abs(rho - rho.conj().T).max():.3e} ({method})")
    rho = 0.5 * (rho + rho.conj().T)
    diagnostics = validate(rho, tol)
    if not diagnostics.passed:
        raise StateValidationError("Steady state failed validation", details=diagnostics.as_dict())
    return SteadyState(rho=rho, residual=residual, diagnostics=diagnostics, kernel_dim=kernel_dim, method=method)
