"""
Dissipative superoperators
Non-secular Bloch-Redfield tensors for the optical and per-site phonon baths,
plus the directional and Lindblad blocks of the heat engine (trap decay,
extraction, reinitialisation).

All blocks act on column-stacked density matrices expressed in the eigenbasis
they were built from: vec(A rho B) = (B^T kron A) vec(rho).
"""

import logging
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp

from config import settings
from environment import dephasing_rate, optical_rate, phonon_rate
from errors import ConfigurationError
from geometry import dipole_moment, dipole_vectors
from hamiltonian import SIGMA_PLUS, SIGMA_X, SIGMA_Z, site_operator
from models import (
    DissipatorBlock,
    Eigenbasis,
    OpticalBath,
    PhononBath,
    ProcessList,
    RingSpec,
    TargetTransition,
)

logger = logging.getLogger(__name__)

ELEMENT_TOL = 1e-12


# ============================================
# Superoperator Primitives
# ============================================

def _sparse(op: np.ndarray) -> sp.csr_matrix:
    dense = np.asarray(op, dtype=complex)
    scale = np.abs(dense).max() if dense.size else 0.0
    dense = np.where(np.abs(dense) > ELEMENT_TOL * max(scale, 1e-300), dense, 0.0)
    return sp.csr_matrix(dense)


def zero_superop(dim: int) -> sp.csr_matrix:
    return sp.csr_matrix((dim * dim, dim * dim), dtype=complex)


def bohr_frequencies(energies: np.ndarray) -> np.ndarray:
    """omega_ab = E_b - E_a; positive entries are energy-lowering |a><b| elements."""
    return energies[None, :] - energies[:, None]


def lindblad(jump: np.ndarray, gamma: float) -> sp.csr_matrix:
    """gamma (L rho L^+ - 1/2 {L^+ L, rho}) as a column-stacking superoperator."""
    op = _sparse(jump)
    dim = op.shape[0]
    if gamma == 0 or op.nnz == 0:
        return zero_superop(dim)
    eye = sp.identity(dim, dtype=complex, format="csr")
    ldl = (op.conj().T @ op).tocsr()
    superop = sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, ldl) - 0.5 * sp.kron(ldl.T, eye)
    return (gamma * superop).tocsr()


def redfield_superop(coupling: np.ndarray, half_rates: np.ndarray) -> sp.csr_matrix:
    """
    Four-term Redfield form for one Hermitian coupling operator A

    D[rho] = L rho A + A rho L^+ - A L rho - rho L^+ A with L = Gamma o A,
    where Gamma_ab is half the bath rate at omega_ab.
    """
    a = _sparse(coupling)
    dim = a.shape[0]
    if a.nnz == 0:
        return zero_superop(dim)
    lam = _sparse(np.asarray(half_rates) * np.asarray(coupling))
    eye = sp.identity(dim, dtype=complex, format="csr")
    superop = (
        sp.kron(a.T, lam)
        + sp.kron(lam.conj(), a)
        - sp.kron(eye, (a @ lam).tocsr())
        - sp.kron((lam.conj().T @ a).T.tocsr(), eye)
    )
    return superop.tocsr()


def _half_rates(energies: np.ndarray, rate: Callable[[np.ndarray], np.ndarray], zero_rate: float) -> np.ndarray:
    omega = bohr_frequencies(energies)
    gamma = np.full(omega.shape, zero_rate, dtype=float)
    finite = np.abs(omega) > settings.FREQUENCY_FLOOR
    if finite.any():
        gamma[finite] = rate(omega[finite])
    return 0.5 * gamma


def secular_filter(superop: sp.spmatrix, energies: np.ndarray, tol: Optional[float] = None) -> sp.csr_matrix:
    """Drop superoperator elements that connect coherences of different Bohr frequency."""
    tol = settings.FREQUENCY_FLOOR if tol is None else tol
    nu = (energies[:, None] - energies[None, :]).ravel(order="F")
    coo = sp.coo_matrix(superop)
    keep = np.abs(nu[coo.row] - nu[coo.col]) <= tol
    return sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=coo.shape)


def trace_violation(superop: sp.spmatrix, dim: int) -> float:
    """max |vec(I)^T S|, zero for a trace-annihilating block."""
    identity_row = np.eye(dim, dtype=complex).ravel(order="F")
    return float(np.abs(superop.T @ identity_row).max()) if superop.nnz else 0.0


# ============================================
# Process Lists
# ============================================

def process_list(operators: List[np.ndarray], energies: np.ndarray) -> ProcessList:
    """
    Non-zero matrix elements of one or more eigenbasis coupling operators

    Each process |row><col| carries one amplitude per operator and the
    frequency E_col - E_row.
    """
    stack = np.array([np.asarray(op) for op in operators])
    magnitude = np.sqrt((np.abs(stack) ** 2).sum(axis=0))
    scale = magnitude.max() if magnitude.size else 0.0
    rows, cols = np.nonzero(magnitude > ELEMENT_TOL * max(scale, 1e-300))
    amplitudes = stack[:, rows, cols].T
    omega = energies[cols] - energies[rows]
    return ProcessList(rows=rows, cols=cols, amplitudes=amplitudes, omega=omega)


def normalized_dipoles(spec: RingSpec) -> np.ndarray:
    """Dipole vectors in units of the dipole of the mean site parameters."""
    reference = dipole_moment(float(np.mean(spec.tau_l)), float(np.mean(spec.omega_a)))
    return dipole_vectors(spec) / reference


def optical_couplings(basis: Eigenbasis, dipoles: np.ndarray) -> List[np.ndarray]:
    """Eigenbasis matrices of A^c = sum_i d_i^c sigma_i^x, one per Cartesian component."""
    sx = [site_operator(SIGMA_X, i, basis.n_qubits) for i in range(dipoles.shape[0])]
    return [
        basis.to_eigenbasis(sum(dipoles[i, c] * sx[i] for i in range(dipoles.shape[0])).toarray())
        for c in range(3)
    ]


def vibrational_coupling(basis: Eigenbasis, site: int) -> np.ndarray:
    return basis.to_eigenbasis(site_operator(SIGMA_Z, site, basis.n_qubits).toarray())


def optical_processes(basis: Eigenbasis, spec: RingSpec) -> ProcessList:
    return process_list(optical_couplings(basis, normalized_dipoles(spec)), basis.energies)


def vibrational_processes(basis: Eigenbasis, site: int) -> ProcessList:
    """Intra-manifold relaxation processes of one site (omega = 0 dephasing excluded)."""
    processes = process_list([vibrational_coupling(basis, site)], basis.energies)
    return processes.relaxation(settings.FREQUENCY_FLOOR)


# ============================================
# Bath Tensors
# ============================================

def optical_tensor(basis: Eigenbasis, spec: RingSpec, bath: OpticalBath) -> DissipatorBlock:
    """
    Non-secular optical Bloch-Redfield tensor

    Summing the Redfield form over the three Cartesian components pairs every
    two processes with the weight d_n . d_m. Dipoles are normalised to the
    mean-site dipole, so bath.kappa_opt must be calibrated on the same
    mean parameters.
    """
    half_rates = _half_rates(basis.energies, lambda w: optical_rate(w, bath), 0.0)
    superop = zero_superop(basis.dim)
    for a in optical_couplings(basis, normalized_dipoles(spec)):
        superop = superop + redfield_superop(a, half_rates)
    return DissipatorBlock(superop=superop.tocsr(), label="optical")


def vibrational_tensor(basis: Eigenbasis, spec: RingSpec, bath: PhononBath) -> List[DissipatorBlock]:
    """
    One Redfield block per site for independent local phonon baths

    Couplings are the eigenbasis matrices of sigma_i^z; degenerate (omega = 0)
    elements dephase at the analytic Ohmic limit kappa k_B T.
    """
    if bath.kappa_vib == 0 and bath.reorganisation == 0:
        return [DissipatorBlock(superop=zero_superop(basis.dim), label=f"vibrational({i})") for i in range(spec.n_sites)]
    half_rates = _half_rates(basis.energies, lambda w: phonon_rate(w, bath), dephasing_rate(bath))
    return [
        DissipatorBlock(superop=redfield_superop(vibrational_coupling(basis, i), half_rates), label=f"vibrational({i})")
        for i in range(spec.n_sites)
    ]


# ============================================
# Heat-Engine Dissipators
# ============================================

def directional_dissipator(
    interaction: np.ndarray,
    gamma: float,
    sigma: int,
    basis: Eigenbasis,
    label: str = "directional",
    normalize: bool = True,
) -> DissipatorBlock:
    """
    Directional Bloch-Redfield dissipator with a uniform rate

    The site-basis interaction is normalised to unit-magnitude elements,
    moved to the eigenbasis and masked by Theta(sigma * omega) with
    Theta(0) = 1: sigma = +1 keeps energy-lowering elements, sigma = -1
    energy-raising ones. Pairing only same-direction processes turns the
    four-term form into a Lindblad term of the retained operator.

    Args:
        interaction: Hermitian site-basis matrix
        gamma: Uniform rate (eV)
        sigma: +1 (decay) or -1 (excitation)
        basis: Eigenbasis the block is expressed in
        label: Block label
        normalize: Set non-zero elements to unit magnitude first

    Raises:
        ValueError: If sigma is not +1 or -1
        ConfigurationError: If the interaction has no non-zero elements
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    m = interaction.toarray() if sp.issparse(interaction) else np.asarray(interaction, dtype=complex)
    nonzero = np.abs(m) > ELEMENT_TOL
    if not nonzero.any():
        raise ConfigurationError("Interaction matrix has no transition content", details={"label": label})
    if normalize:
        m = np.where(nonzero, m / np.where(nonzero, np.abs(m), 1.0), 0.0)
    a = basis.to_eigenbasis(m)
    keep = sigma * bohr_frequencies(basis.energies) >= -settings.FREQUENCY_FLOOR
    return DissipatorBlock(superop=lindblad(np.where(keep, a, 0.0), gamma), label=label)


def trap_decay(basis: Eigenbasis, gamma_t: float) -> DissipatorBlock:
    """Trap relaxation: sigma_t^x filtered to its decay part."""
    if not basis.has_trap:
        raise ConfigurationError("Trap decay needs a basis that includes the trap")
    sx_t = site_operator(SIGMA_X, basis.n_qubits - 1, basis.n_qubits)
    return directional_dissipator(sx_t, gamma_t, +1, basis, label="trap")


def _ring_projector(ring: Eigenbasis, to_state: int, from_state: int) -> np.ndarray:
    return np.outer(ring.states[:, to_state], ring.states[:, from_state].conj())


def extraction_incoherent(
    basis: Eigenbasis, ring: Eigenbasis, target: TargetTransition, gamma_x: float, mode: str = "incoherent"
) -> DissipatorBlock:
    """
    Targeted extraction L = |BTTS><TTTS| (x) sigma_t^+ at rate gamma_x

    Raises:
        ConfigurationError: If the trap is in coherent mode or absent
    """
    if mode != "incoherent":
        raise ConfigurationError("Incoherent extraction requested for a coherent trap")
    if not basis.has_trap:
        raise ConfigurationError("Extraction needs a basis that includes the trap")
    jump = np.kron(_ring_projector(ring, target.btts, target.ttts), SIGMA_PLUS)
    return DissipatorBlock(superop=lindblad(basis.to_eigenbasis(jump), gamma_x), label="extraction")


def reinit_ladder(
    basis: Eigenbasis, ring: Eigenbasis, target: TargetTransition, gamma_r: float, coherent: bool = False
) -> DissipatorBlock:
    """
    Ladder-climbing reinitialisation: pumps |BTTS><rung n| for every rung below the BTTS

    The ground state is rung 0. With a coherently coupled trap the pumps are
    formed as directional excitation dissipators in the ring + trap eigenbasis.
    """
    superop = zero_superop(basis.dim)
    for n in range(target.rung):
        pump = _ring_projector(ring, target.btts, ring.ladder_index(n))
        if basis.has_trap:
            pump = np.kron(pump, np.eye(2))
        if coherent:
            block = directional_dissipator(pump + pump.conj().T, gamma_r, -1, basis, label="reinit", normalize=False)
            superop = superop + block.superop
        else:
            superop = superop + lindblad(basis.to_eigenbasis(pump), gamma_r)
    if target.rung == 0:
        logger.debug("No rungs below the BTTS; ladder reinitialisation is empty")
    return DissipatorBlock(superop=superop.tocsr(), label="reinit")


def reinit_site(basis: Eigenbasis, n_sites: int, gamma_r: float) -> DissipatorBlock:
    """Site-based reinitialisation: directional excitation through every sigma_i^x."""
    superop = zero_superop(basis.dim)
    for i in range(n_sites):
        sx = site_operator(SIGMA_X, i, basis.n_qubits)
        superop = superop + directional_dissipator(sx, gamma_r, -1, basis, label="reinit").superop
    return DissipatorBlock(superop=superop.tocsr(), label="reinit")
