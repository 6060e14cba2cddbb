"""
Domain records for the photocell engine

Numerical state (geometry, eigenbases, baths, superoperators, steady states)
is held in frozen dataclasses. Anything that is read from or written to disk
lives in schemas.py instead.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

# ============================================
# Ring & Trap
# ============================================

EXTRACTION_MODES = ("incoherent", "coherent")
LADDER_CONVENTIONS = ("guide_slide", "parallel")


@dataclass(frozen=True)
class TrapSpec:
    """Heat-engine trap: a two-level load next to the ring"""

    mode: str = "incoherent"
    gamma_x: Optional[float] = 1e-2   # eV, incoherent extraction rate
    c_x: Optional[float] = None       # eV, coherent ring-trap coupling
    omega_t: Optional[float] = None   # eV, fixed to omega_good at build time

    def __post_init__(self):
        if self.mode not in EXTRACTION_MODES:
            raise ValueError(f"Unknown extraction mode: {self.mode}")
        if self.mode == "incoherent":
            if self.gamma_x is None or self.gamma_x < 0:
                raise ValueError("Incoherent extraction needs gamma_x >= 0")
        elif self.c_x is None:
            raise ValueError("Coherent extraction needs c_x")


@dataclass(frozen=True)
class RingSpec:
    """Full physical scenario of one ring: sites, dipoles, optional trap"""

    n_sites: int
    r_nn: float
    omega_a: np.ndarray
    tau_l: np.ndarray
    theta_eq: np.ndarray
    theta_zen: np.ndarray
    positions: np.ndarray
    trap: Optional[TrapSpec] = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.r_nn <= 0:
            raise ValueError("r_nn must be positive")
        for name in ("omega_a", "tau_l", "theta_eq", "theta_zen"):
            arr = getattr(self, name)
            if np.shape(arr) != (self.n_sites,):
                raise ValueError(f"{name} must have one entry per site")
        if np.any(self.omega_a <= 0):
            raise ValueError("omega_a must be positive at every site")
        if np.any(self.tau_l <= 0):
            raise ValueError("tau_l must be positive at every site")
        if np.shape(self.positions) != (self.n_sites, 3):
            raise ValueError("positions must be an (n_sites, 3) array")

    @property
    def has_trap(self) -> bool:
        return self.trap is not None


@dataclass(frozen=True)
class CouplingMatrix:
    """Pairwise dipole-dipole couplings in eV (symmetric, zero diagonal)"""

    j: np.ndarray

    def nearest_neighbour(self) -> float:
        n = self.j.shape[0]
        return float(self.j[0, 1 % n]) if n > 1 else 0.0


# ============================================
# Eigenbasis & Transitions
# ============================================

@dataclass(frozen=True)
class Eigenbasis:
    """Eigen-decomposition of a ring (or ring + trap) Hamiltonian"""

    energies: np.ndarray       # (d,) ascending
    states: np.ndarray         # (d, d) columns are eigenvectors in the site basis
    manifold: np.ndarray       # (d,) excitation number
    ladder_flag: np.ndarray    # (d,) bool, one per manifold once identified
    n_qubits: int
    convention: Optional[str] = None
    has_trap: bool = False    # trap is the last (least significant) qubit

    @property
    def n_sites(self) -> int:
        return self.n_qubits - 1 if self.has_trap else self.n_qubits

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def n_manifolds(self) -> int:
        return int(self.manifold.max()) + 1

    def manifold_indices(self, m: int) -> np.ndarray:
        return np.flatnonzero(self.manifold == m)

    def ladder_index(self, m: int) -> int:
        idx = np.flatnonzero(self.ladder_flag & (self.manifold == m))
        if idx.size != 1:
            raise ValueError(f"No unique ladder state flagged in manifold {m}")
        return int(idx[0])

    def ladder_indices(self) -> List[int]:
        return [self.ladder_index(m) for m in range(self.n_manifolds)]

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.states.conj().T @ op @ self.states

    def to_site_basis(self, op: np.ndarray) -> np.ndarray:
        return self.states @ op @ self.states.conj().T


@dataclass(frozen=True)
class TargetTransition:
    btts: int
    ttts: int
    omega_good: float
    omega_bad: Optional[float]
    rung: int


@dataclass(frozen=True)
class TransitionTable:
    """Optical transitions between adjacent manifolds, stored in both directions"""

    source: np.ndarray      # (k,) eigenstate index
    target: np.ndarray      # (k,)
    omega: np.ndarray       # (k,) emission-convention frequency, > 0
    dvec: np.ndarray        # (k, 3) complex transition dipole
    dipole_sq: np.ndarray   # (k,) |dvec|^2
    strength: np.ndarray    # (k,) |dvec|^2 omega^3

    def __len__(self) -> int:
        return int(self.source.shape[0])


# ============================================
# Environment
# ============================================

@dataclass(frozen=True)
class BandGap:
    cutoff: float            # eV
    suppression: float       # S in [0, 1]
    side: str = "below"      # suppress |omega| below (guide-slide) or above (parallel) the cutoff

    def __post_init__(self):
        if not 0.0 <= self.suppression <= 1.0:
            raise ValueError("Suppression must lie in [0, 1]")
        if self.side not in ("below", "above"):
            raise ValueError(f"Unknown band-gap side: {self.side}")


@dataclass(frozen=True)
class OpticalBath:
    temperature: float
    kappa_opt: float                  # eV^-2
    bandgap: Optional[BandGap] = None


@dataclass(frozen=True)
class PhononBath:
    model: str = "ohmic"
    temperature: float = 300.0
    kappa_vib: float = 0.0            # ohmic prefactor (dimensionless, rates in eV)
    reorganisation: float = 0.0       # super-Ohmic lambda, eV
    omega_crit: float = 1.0           # super-Ohmic cutoff, eV

    def __post_init__(self):
        if self.model not in ("ohmic", "superohmic"):
            raise ValueError(f"Unknown phonon model: {self.model}")
        if self.kappa_vib < 0 or self.reorganisation < 0:
            raise ValueError("Phonon coupling strengths must be non-negative")


# ============================================
# Superoperators
# ============================================

@dataclass(frozen=True)
class ProcessList:
    """Matrix-element processes A_n = a_n |row><col| with frequency E_col - E_row"""

    rows: np.ndarray
    cols: np.ndarray
    amplitudes: np.ndarray    # (k, c) complex, c = 3 for optical, 1 otherwise
    omega: np.ndarray         # (k,) > 0 lowers the energy

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def relaxation(self, floor: float) -> "ProcessList":
        keep = np.abs(self.omega) > floor
        return ProcessList(self.rows[keep], self.cols[keep], self.amplitudes[keep], self.omega[keep])


@dataclass(frozen=True)
class DissipatorBlock:
    superop: sp.csr_matrix
    label: str


@dataclass(frozen=True)
class Liouvillian:
    superop: sp.csr_matrix
    dim: int
    blocks: Tuple[DissipatorBlock, ...] = ()


@dataclass(frozen=True)
class Tolerances:
    residual: float
    trace: float
    hermiticity: float
    positivity: float
    kernel: float

    @classmethod
    def from_settings(cls, settings, overrides: Optional[Dict[str, Optional[float]]] = None) -> "Tolerances":
        values = {
            "residual": settings.RESIDUAL_TOL,
            "trace": settings.TRACE_TOL,
            "hermiticity": settings.HERMITICITY_TOL,
            "positivity": settings.POSITIVITY_TOL,
            "kernel": settings.KERNEL_TOL,
        }
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        return cls(**values)


@dataclass(frozen=True)
class StateDiagnostics:
    trace_dev: float
    hermiticity_dev: float
    min_eigenvalue: float
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return {
            "trace_dev": self.trace_dev,
            "hermiticity_dev": self.hermiticity_dev,
            "min_eigenvalue": self.min_eigenvalue,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    residual: float
    diagnostics: StateDiagnostics
    kernel_dim: int = 1
    method: str = "bordered"


# ============================================
# Studies
# ============================================

DISORDER_TARGETS = frozenset({"omega_a", "tau_l", "positions", "angles"})


@dataclass(frozen=True)
class DisorderSpec:
    fraction: float = 0.0
    seed: int = 0
    targets: FrozenSet[str] = DISORDER_TARGETS

    def __post_init__(self):
        if self.fraction < 0:
            raise ValueError("Disorder fraction must be >= 0")
        unknown = set(self.targets) - DISORDER_TARGETS
        if unknown:
            raise ValueError(f"Unknown disorder targets: {sorted(unknown)}")


@dataclass
class SweepResult:
    """Rows of one study plus its axes, aggregate statistics and run metadata"""

    study: str
    axes: Dict[str, List[Any]]
    rows: List[Dict[str, Any]]
    statistics: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)
