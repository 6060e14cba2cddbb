"""
Ring geometry
Builds site positions, per-site dipole vectors and the pairwise
dipole-dipole coupling matrix.
"""

import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from constants import EPSILON_0, HBAR_EV_S, HBAR_J_S, JOULE_PER_EV, SPEED_OF_LIGHT, polygon_circumradius
from errors import GeometryError
from models import CouplingMatrix, RingSpec, TrapSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


# ============================================
# Positions & Local Frames
# ============================================

def site_angles(n_sites: int) -> np.ndarray:
    """Nominal azimuth of every site on the regular polygon."""
    return 2.0 * np.pi * np.arange(n_sites) / n_sites


def polygon_positions(n_sites: int, r_nn: float) -> np.ndarray:
    """Regular polygon in the xy-plane with side r_nn, site 0 on the +x axis."""
    radius = polygon_circumradius(r_nn, n_sites)
    phi = site_angles(n_sites)
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), np.zeros(n_sites)])


def local_frame(phi: float):
    """(outward radial, tangential, ring normal) unit vectors at azimuth phi."""
    radial = np.array([math.cos(phi), math.sin(phi), 0.0])
    tangential = np.array([-math.sin(phi), math.cos(phi), 0.0])
    normal = np.array([0.0, 0.0, 1.0])
    return radial, tangential, normal


def dipole_orientation(site: int, spec: RingSpec) -> np.ndarray:
    """
    Unit dipole direction of one site

    The local frame is tied to the nominal polygon azimuth, so positional
    disorder does not rotate the dipoles.

    Args:
        site: Site index
        spec: Ring description

    Returns:
        Unit 3-vector
    """
    theta_eq = float(spec.theta_eq[site]) % (2.0 * np.pi)
    theta_zen = float(spec.theta_zen[site])
    radial, tangential, normal = local_frame(site_angles(spec.n_sites)[site])
    in_plane = math.cos(theta_eq) * radial + math.sin(theta_eq) * tangential
    return math.cos(theta_zen) * in_plane + math.sin(theta_zen) * normal


# ============================================
# Dipole Moments
# ============================================

def dipole_moment(tau_l: float, omega_a: float) -> float:
    """
    Dipole moment magnitude from natural lifetime and transition energy

    |d| = sqrt(3 pi eps0 hbar c^3 / (tau_L omega^3)) with omega in rad/s.

    Args:
        tau_l: Natural lifetime (s)
        omega_a: Transition energy (eV)

    Returns:
        Dipole moment in C m

    Raises:
        ValueError: If either input is not positive
    """
    if tau_l <= 0 or omega_a <= 0:
        raise ValueError(f"dipole_moment needs positive inputs, got tau_l={tau_l}, omega_a={omega_a}")
    omega = omega_a / HBAR_EV_S
    return math.sqrt(3.0 * math.pi * EPSILON_0 * HBAR_J_S * SPEED_OF_LIGHT ** 3 / (tau_l * omega ** 3))


def dipole_vectors(spec: RingSpec) -> np.ndarray:
    """(N, 3) array of dipole vectors in C m."""
    return np.array([
        dipole_moment(float(spec.tau_l[i]), float(spec.omega_a[i])) * dipole_orientation(i, spec)
        for i in range(spec.n_sites)
    ])


def collective_dipole_fraction(spec: RingSpec) -> float:
    """|sum_i d_i| / sum_i |d_i|"""
    d = dipole_vectors(spec)
    return float(np.linalg.norm(d.sum(axis=0)) / np.linalg.norm(d, axis=1).sum())


# ============================================
# Couplings
# ============================================

def coupling(spec: RingSpec) -> CouplingMatrix:
    """
    Pairwise dipole-dipole coupling matrix in eV

    Raises:
        GeometryError: If two sites coincide
    """
    d = dipole_vectors(spec)
    pos = np.asarray(spec.positions, dtype=float)
    n = spec.n_sites
    j = np.zeros((n, n))
    min_sep = 1e-6 * spec.r_nn
    for i in range(n):
        for k in range(i + 1, n):
            r = pos[k] - pos[i]
            dist = float(np.linalg.norm(r))
            if dist < min_sep:
                raise GeometryError(
                    "degenerate geometry: coincident sites",
                    details={"sites": [i, k], "separation": dist},
                )
            r_hat = r / dist
            energy = (d[i] @ d[k] - 3.0 * (r_hat @ d[i]) * (r_hat @ d[k])) / (4.0 * np.pi * EPSILON_0 * dist ** 3)
            j[i, k] = j[k, i] = energy / JOULE_PER_EV
    return CouplingMatrix(j=j)


def uncoupled(spec: RingSpec) -> CouplingMatrix:
    return CouplingMatrix(j=np.zeros((spec.n_sites, spec.n_sites)))


# ============================================
# Construction
# ============================================

def _per_site(value: ArrayLike, n_sites: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n_sites, float(arr))
    if arr.shape != (n_sites,):
        raise ValueError(f"{name} must be a scalar or have {n_sites} entries")
    return arr.copy()


def build_ring_spec(
    n_sites: int,
    omega_a: ArrayLike = 1.8,
    tau_l: ArrayLike = 2.5e-9,
    r_nn: float = 1e-9,
    theta_eq: ArrayLike = math.pi / 2,
    theta_zen: ArrayLike = math.pi / 4,
    positions: Optional[np.ndarray] = None,
    trap: Optional[TrapSpec] = None,
) -> RingSpec:
    """Build a ring on the regular polygon; scalar parameters are broadcast to every site."""
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if positions is None:
        positions = polygon_positions(n_sites, r_nn)
    return RingSpec(
        n_sites=n_sites,
        r_nn=r_nn,
        omega_a=_per_site(omega_a, n_sites, "omega_a"),
        tau_l=_per_site(tau_l, n_sites, "tau_l"),
        theta_eq=_per_site(theta_eq, n_sites, "theta_eq"),
        theta_zen=_per_site(theta_zen, n_sites, "theta_zen"),
        positions=np.asarray(positions, dtype=float),
        trap=trap,
    )
