"""
Ring Hamiltonian
Builds the ring (and ring + trap) Hamiltonian, diagonalises it sector by
sector, labels excitation manifolds and ladder states, and tabulates the
optical transition dipoles between adjacent manifolds.

Basis convention: local index 1 is the excited state, site 0 is the most
significant qubit and the trap (if any) is the last qubit.
"""

import logging
from typing import List, Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from config import settings
from errors import ConfigurationError, DimensionError, NotHermitianError
from geometry import dipole_moment, dipole_vectors
from models import (
    LADDER_CONVENTIONS,
    CouplingMatrix,
    Eigenbasis,
    RingSpec,
    TargetTransition,
    TransitionTable,
)

logger = logging.getLogger(__name__)

SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)

LADDER_TIE_TOL = 1e-12
HERMITICITY_TOL = 1e-12
DIPOLE_DROP_TOL = 1e-14


# ============================================
# Operators
# ============================================

def site_operator(local: np.ndarray, site: int, n_qubits: int) -> sp.csr_matrix:
    """Embed a 2x2 operator acting on one qubit into the full tensor-product space."""
    left = sp.identity(2 ** site, dtype=complex, format="csr")
    right = sp.identity(2 ** (n_qubits - site - 1), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(local)), right, format="csr")


def excitation_numbers(n_qubits: int) -> np.ndarray:
    """Number of excited qubits in every computational basis state."""
    idx = np.arange(2 ** n_qubits)
    return sum((idx >> q) & 1 for q in range(n_qubits)).astype(int)


def qubit_count(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise DimensionError(f"Dimension {dim} is not a power of two", details={"dim": dim})
    return n


# ============================================
# Hamiltonian
# ============================================

def build_hamiltonian(spec: RingSpec, couplings: CouplingMatrix) -> np.ndarray:
    """
    Ring Hamiltonian (omega_A/2) sum sigma_z + sum_{i != k} j_ik sigma_i^+ sigma_k^-

    With a trap the trap qubit adds (omega_t/2) sigma_z; coherent extraction
    also adds C_x sum_i (sigma_i^+ sigma_t^- + h.c.).

    Raises:
        DimensionError: If the Hilbert space exceeds the configured cap
        ConfigurationError: If a trap is present without omega_t
    """
    n = spec.n_sites
    n_qubits = n + (1 if spec.has_trap else 0)
    dim = 2 ** n_qubits
    if dim > settings.MAX_HILBERT_DIM:
        raise DimensionError(
            f"Hilbert dimension {dim} exceeds cap {settings.MAX_HILBERT_DIM}",
            details={"dim": dim, "cap": settings.MAX_HILBERT_DIM},
        )

    h = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        h = h + 0.5 * float(spec.omega_a[i]) * site_operator(SIGMA_Z, i, n_qubits)
    raising = [site_operator(SIGMA_PLUS, i, n_qubits) for i in range(n_qubits)]
    for i in range(n):
        for k in range(i + 1, n):
            jik = float(couplings.j[i, k])
            if jik == 0.0:
                continue
            hop = raising[i] @ raising[k].conj().T
            h = h + jik * (hop + hop.conj().T)

    if spec.has_trap:
        trap = spec.trap
        if trap.omega_t is None:
            raise ConfigurationError("Trap splitting omega_t must be set before building the Hamiltonian")
        h = h + 0.5 * trap.omega_t * site_operator(SIGMA_Z, n, n_qubits)
        if trap.mode == "coherent":
            for i in range(n):
                hop = raising[i] @ raising[n].conj().T
                h = h + trap.c_x * (hop + hop.conj().T)
    return h.toarray()


# ============================================
# Diagonalisation
# ============================================

def diagonalize(h: np.ndarray, has_trap: bool = False) -> Eigenbasis:
    """
    Diagonalise a Hamiltonian that conserves total excitation number

    Each excitation sector is diagonalised separately so that eigenvectors
    never mix manifolds. If the input does couple sectors beyond the mixing
    tolerance, a warning is logged and a full diagonalisation is used, with
    manifolds assigned by rounding the excitation expectation value.

    Args:
        h: Hermitian matrix of dimension 2^n_qubits
        has_trap: Whether the last qubit is a trap

    Returns:
        Eigenbasis with energies sorted ascending and no ladder flags set

    Raises:
        NotHermitianError: If h deviates from its adjoint
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError("Hamiltonian must be a square matrix", details={"shape": list(h.shape)})
    scale = max(1.0, float(np.abs(h).max()))
    deviation = float(np.abs(h - h.conj().T).max())
    if deviation > HERMITICITY_TOL * scale:
        raise NotHermitianError("Hamiltonian is not Hermitian", details={"deviation": deviation})

    n_qubits = qubit_count(h.shape[0])
    exc = excitation_numbers(n_qubits)
    off_sector = exc[:, None] != exc[None, :]
    mixing = float(np.abs(h[off_sector]).max()) if off_sector.any() else 0.0

    if mixing > settings.MANIFOLD_MIXING_TOL * scale:
        logger.warning(f"Hamiltonian mixes excitation sectors (max element {mixing:.3e}); using full diagonalisation")
        energies, states = la.eigh(h)
        number = (np.abs(states) ** 2 * exc[:, None]).sum(axis=0)
        manifold = np.rint(number).astype(int)
    else:
        energy_parts, manifold_parts, columns = [], [], []
        for m in range(n_qubits + 1):
            idx = np.flatnonzero(exc == m)
            e, v = la.eigh(h[np.ix_(idx, idx)])
            block = np.zeros((h.shape[0], idx.size), dtype=complex)
            block[idx, :] = v
            energy_parts.append(e)
            manifold_parts.append(np.full(idx.size, m))
            columns.append(block)
        energies = np.concatenate(energy_parts)
        manifold = np.concatenate(manifold_parts)
        states = np.hstack(columns)

    order = np.argsort(energies, kind="stable")
    return Eigenbasis(
        energies=np.asarray(energies)[order],
        states=states[:, order],
        manifold=manifold[order],
        ladder_flag=np.zeros(h.shape[0], dtype=bool),
        n_qubits=n_qubits,
        has_trap=has_trap,
    )


def product_basis(ring: Eigenbasis, omega_t: float) -> Eigenbasis:
    """Eigenbasis of an uncoupled ring + trap: ring eigenstates tensored with trap levels."""
    trap_energies = np.array([-0.5 * omega_t, 0.5 * omega_t])
    energies = (ring.energies[:, None] + trap_energies[None, :]).ravel()
    manifold = (ring.manifold[:, None] + np.array([0, 1])[None, :]).ravel()
    states = np.kron(ring.states, np.eye(2, dtype=complex))
    order = np.argsort(energies, kind="stable")
    return Eigenbasis(
        energies=energies[order],
        states=states[:, order],
        manifold=manifold[order],
        ladder_flag=np.zeros(energies.size, dtype=bool),
        n_qubits=ring.n_qubits + 1,
        has_trap=True,
    )


# ============================================
# Ladder & Target
# ============================================

def identify_ladder(basis: Eigenbasis, convention: str) -> List[int]:
    """Ladder state per manifold: lowest energy (guide_slide) or highest (parallel)."""
    if convention not in LADDER_CONVENTIONS:
        raise ValueError(f"Unknown ladder convention: {convention}")
    ladder = []
    for m in range(basis.n_manifolds):
        idx = basis.manifold_indices(m)
        e = basis.energies[idx]
        if convention == "guide_slide":
            candidates = np.flatnonzero(e <= e.min() + LADDER_TIE_TOL)
        else:
            candidates = np.flatnonzero(e >= e.max() - LADDER_TIE_TOL)
        ladder.append(int(idx[candidates[0]]))
    return ladder


def infer_convention(spec: RingSpec, couplings: CouplingMatrix) -> str:
    """
    Ladder convention implied by the dipole geometry

    Compares the collective dipole strength of the lowest and highest
    single-excitation eigenstates; the brighter end hosts the ladder.
    A degenerate single-excitation manifold (no couplings) has no
    preferred end and falls back to the parallel convention.
    """
    h1 = np.diag(np.asarray(spec.omega_a, dtype=float)) + couplings.j
    energies, states = la.eigh(h1)
    if energies[-1] - energies[0] <= LADDER_TIE_TOL:
        return "parallel"
    bright = np.sum(np.abs(states.T @ dipole_vectors(spec)) ** 2, axis=1)
    return "guide_slide" if bright[0] > bright[-1] else "parallel"


def flag_ladder(basis: Eigenbasis, convention: str) -> Eigenbasis:
    """Copy of the basis with ladder flags set for the given convention."""
    flags = np.zeros(basis.dim, dtype=bool)
    flags[identify_ladder(basis, convention)] = True
    return Eigenbasis(
        energies=basis.energies,
        states=basis.states,
        manifold=basis.manifold,
        ladder_flag=flags,
        n_qubits=basis.n_qubits,
        convention=convention,
        has_trap=basis.has_trap,
    )


def target_rung(n_sites: int) -> int:
    """Manifold of the bottom of the target transition, counted from the ground state."""
    return (n_sites - 1) // 2


def target_transition(basis: Eigenbasis) -> TargetTransition:
    n_sites = basis.n_manifolds - 1
    rung = target_rung(n_sites)
    btts = basis.ladder_index(rung)
    ttts = basis.ladder_index(rung + 1)
    omega_good = float(basis.energies[ttts] - basis.energies[btts])
    omega_bad: Optional[float] = None
    if rung >= 1:
        omega_bad = float(basis.energies[btts] - basis.energies[basis.ladder_index(rung - 1)])
    return TargetTransition(btts=btts, ttts=ttts, omega_good=omega_good, omega_bad=omega_bad, rung=rung)


def ladder_frequencies(basis: Eigenbasis) -> np.ndarray:
    """Transition frequencies between consecutive ladder states, bottom first."""
    return np.diff(basis.energies[basis.ladder_indices()])


# ============================================
# Transition Dipoles
# ============================================

def dipole_operators(basis: Eigenbasis, dipoles: np.ndarray) -> np.ndarray:
    """Eigenbasis matrices of sum_i d_i^c sigma_i^x for c = x, y, z; shape (3, d, d)."""
    ops = []
    sx = [site_operator(SIGMA_X, i, basis.n_qubits) for i in range(dipoles.shape[0])]
    for c in range(3):
        total = sum(dipoles[i, c] * sx[i] for i in range(dipoles.shape[0]))
        ops.append(basis.to_eigenbasis(total.toarray()))
    return np.array(ops)


def transition_table(basis: Eigenbasis, spec: RingSpec, dipoles: Optional[np.ndarray] = None) -> TransitionTable:
    """
    Optical transitions between adjacent manifolds of a ring eigenbasis

    dvec(a -> b) = sum_i d_i <b|sigma_i^x|a>. Each pair appears twice (upward
    and downward, conjugate dipoles) with the same emission-convention omega.
    Entries below 1e-14 of the largest dipole are dropped.
    """
    if dipoles is None:
        dipoles = dipole_vectors(spec)
    ops = dipole_operators(basis, dipoles)

    source, target, omega, dvec = [], [], [], []
    for m in range(basis.n_manifolds - 1):
        lo = basis.manifold_indices(m)
        hi = basis.manifold_indices(m + 1)
        block = ops[:, hi][:, :, lo]          # [c, beta, alpha] = <beta|D^c|alpha>
        b_idx, a_idx = np.meshgrid(hi, lo, indexing="ij")
        a_idx, b_idx = a_idx.ravel(), b_idx.ravel()
        vec = block.reshape(3, -1).T
        w = basis.energies[b_idx] - basis.energies[a_idx]
        source += [a_idx, b_idx]
        target += [b_idx, a_idx]
        omega += [w, w]
        dvec += [vec, vec.conj()]

    if not source:
        empty = np.zeros(0)
        return TransitionTable(empty.astype(int), empty.astype(int), empty, np.zeros((0, 3), dtype=complex), empty, empty)

    dvec = np.concatenate(dvec)
    dipole_sq = np.sum(np.abs(dvec) ** 2, axis=1)
    keep = np.sqrt(dipole_sq) >= DIPOLE_DROP_TOL * np.sqrt(dipole_sq.max())
    omega = np.concatenate(omega)
    return TransitionTable(
        source=np.concatenate(source)[keep],
        target=np.concatenate(target)[keep],
        omega=omega[keep],
        dvec=dvec[keep],
        dipole_sq=dipole_sq[keep],
        strength=dipole_sq[keep] * omega[keep] ** 3,
    )


def _upward_from(basis: Eigenbasis, table: TransitionTable, state: int) -> np.ndarray:
    return (table.source == state) & (basis.manifold[table.target] == basis.manifold[state] + 1)


def target_strength(basis: Eigenbasis, table: TransitionTable, weighting: str = "strength") -> float:
    """
    Summed strength of every transition leaving the BTTS upward

    Args:
        weighting: "strength" (|d|^2 omega^3) or "dipole_sq" (|d|^2)
    """
    if weighting not in ("strength", "dipole_sq"):
        raise ValueError(f"Unknown weighting: {weighting}")
    up = _upward_from(basis, table, target_transition(basis).btts)
    return float(getattr(table, weighting)[up].sum())


def target_is_strongest(basis: Eigenbasis, table: TransitionTable, weighting: str = "dipole_sq") -> bool:
    """True when BTTS -> TTTS dominates every other upward transition out of the BTTS."""
    target = target_transition(basis)
    up = np.flatnonzero(_upward_from(basis, table, target.btts))
    if up.size == 0:
        return False
    weights = getattr(table, weighting)[up]
    return int(table.target[up[np.argmax(weights)]]) == target.ttts


def single_site_strength(omega_a: float, tau_l: float, weighting: str = "strength") -> float:
    d_sq = dipole_moment(tau_l, omega_a) ** 2
    return d_sq * omega_a ** 3 if weighting == "strength" else d_sq


def dicke_strength(n_sites: int, manifold: int, single: float) -> float:
    """Upward strength of the symmetric Dicke state of a manifold: (m+1)(N-m) single."""
    return (manifold + 1) * (n_sites - manifold) * single
