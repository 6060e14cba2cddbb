"""
Bath models
Occupation numbers, optical and phonon rate functions, band-gap suppression
and the calibration of bath strengths.

Frequencies are signed: omega > 0 is emission (the system loses energy),
omega < 0 the detailed-balance absorption partner.
"""

import logging
from typing import Optional, Union

import numpy as np

from constants import lifetime_to_rate, thermal_energy
from errors import CalibrationError
from models import BandGap, Eigenbasis, OpticalBath, PhononBath

logger = logging.getLogger(__name__)

Frequency = Union[float, np.ndarray]


def _as_output(values: np.ndarray, like) -> Frequency:
    return float(values) if np.ndim(like) == 0 else values


def _reject_zero(omega: np.ndarray, name: str):
    if np.any(omega == 0):
        raise ValueError(f"{name} is undefined at omega = 0")


# ============================================
# Occupation
# ============================================

def bose_einstein(omega: Frequency, temperature: float) -> Frequency:
    """
    Bose-Einstein occupancy 1 / (exp(omega / k_B T) - 1)

    Args:
        omega: Mode energy in eV (> 0)
        temperature: Bath temperature in K (>= 0)

    Raises:
        ValueError: If omega <= 0 or temperature < 0
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("bose_einstein needs omega > 0")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return _as_output(np.zeros_like(w), omega)
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(w / thermal_energy(temperature))
    return _as_output(n, omega)


def _thermal_weight(omega: np.ndarray, temperature: float) -> np.ndarray:
    """(1 + n) for emission, n for absorption."""
    n = np.asarray(bose_einstein(np.abs(omega), temperature))
    return np.where(omega > 0, 1.0 + n, n)


# ============================================
# Band Gap
# ============================================

def bandgap_factor(omega: np.ndarray, bandgap: Optional[BandGap]) -> np.ndarray:
    """Multiplier (1 - S) on the suppressed side of the cutoff, 1 elsewhere."""
    w = np.abs(omega)
    if bandgap is None:
        return np.ones_like(w)
    if bandgap.side == "below":
        suppressed = w < bandgap.cutoff
    else:
        suppressed = w > bandgap.cutoff
    return np.where(suppressed, 1.0 - bandgap.suppression, 1.0)


def bandgap_cutoff(omega_good: float, omega_bad: float, side: str = "below") -> float:
    """
    Midpoint between the target and the unwanted BTTS emission frequency

    A warning is logged when the two frequencies sit on the wrong sides for
    the requested gap, since suppression then cannot separate them.
    """
    if omega_good <= 0 or omega_bad <= 0:
        raise ValueError("bandgap_cutoff needs positive frequencies")
    separable = omega_bad < omega_good if side == "below" else omega_bad > omega_good
    if not separable:
        logger.warning(
            f"Band gap ({side}) cannot separate omega_good={omega_good:.6f} eV from omega_bad={omega_bad:.6f} eV"
        )
    return 0.5 * (omega_good + omega_bad)


# ============================================
# Rates
# ============================================

def optical_kappa(omega_a: float, tau_l: float) -> float:
    """kappa_opt such that the spontaneous rate at omega_A equals hbar / tau_L."""
    return lifetime_to_rate(tau_l) / omega_a ** 3


def optical_rate(omega: Frequency, bath: OpticalBath) -> Frequency:
    """
    Optical rate kappa |omega|^3 (1 + n) for emission, kappa |omega|^3 n for absorption

    The band-gap factor (1 - S) multiplies rates on the suppressed side.

    Raises:
        ValueError: If omega == 0
    """
    w = np.asarray(omega, dtype=float)
    _reject_zero(w, "optical_rate")
    rate = bath.kappa_opt * np.abs(w) ** 3 * _thermal_weight(w, bath.temperature)
    return _as_output(rate * bandgap_factor(w, bath.bandgap), omega)


def spectral_density(omega: Frequency, bath: PhononBath) -> Frequency:
    """Phonon spectral density at |omega| (Ohmic or super-Ohmic)."""
    w = np.abs(np.asarray(omega, dtype=float))
    if bath.model == "ohmic":
        j = bath.kappa_vib * w
    else:
        j = bath.reorganisation * w ** 3 / (2.0 * bath.omega_crit ** 3) * np.exp(-w / bath.omega_crit)
    return _as_output(j, omega)


def phonon_rate(omega: Frequency, bath: PhononBath) -> Frequency:
    """
    Phonon rate J(|omega|)(1 + n) for emission, J(|omega|) n for absorption

    Raises:
        ValueError: If omega == 0; use dephasing_rate for that limit
    """
    w = np.asarray(omega, dtype=float)
    _reject_zero(w, "phonon_rate")
    rate = np.asarray(spectral_density(w, bath)) * _thermal_weight(w, bath.temperature)
    return _as_output(rate, omega)


def dephasing_rate(bath: PhononBath) -> float:
    """omega -> 0 limit of the phonon rate: kappa k_B T (Ohmic), 0 (super-Ohmic)."""
    if bath.model == "ohmic":
        return bath.kappa_vib * thermal_energy(bath.temperature)
    return 0.0


# ============================================
# Calibration
# ============================================

def mean_vibrational_frequency(basis: Eigenbasis) -> float:
    """
    Mean of all intra-manifold transition frequencies of the eigenbasis

    Raises:
        CalibrationError: If the basis has no intra-manifold transitions
    """
    same = basis.manifold[:, None] == basis.manifold[None, :]
    gaps = np.abs(basis.energies[:, None] - basis.energies[None, :])
    upper = np.triu(same & (gaps > 1e-12), k=1)
    if not upper.any():
        raise CalibrationError("No intra-manifold transitions to calibrate phonon coupling against")
    return float(gaps[upper].mean())


def calibrate_kappa_vib(basis: Eigenbasis, tau_l: float, multiplier: float = 1e3) -> float:
    """
    Ohmic strength such that spontaneous phonon emission at the mean
    intra-manifold frequency is `multiplier` times the optical rate hbar / tau_L.

    Raises:
        CalibrationError: If the basis has no intra-manifold structure (N = 1)
    """
    omega_vib = mean_vibrational_frequency(basis)
    kappa = multiplier * lifetime_to_rate(float(np.mean(tau_l))) / omega_vib
    logger.debug(f"kappa_vib = {kappa:.4e} (mean vibrational frequency {omega_vib:.4e} eV)")
    return kappa
