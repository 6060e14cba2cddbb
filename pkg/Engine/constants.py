"""
Physical constants and unit conversions

All couplings, rates and energies inside the engine are in eV (hbar = 1).
SI constants enter only through the dipole moment, the dipole-dipole coupling
and the conversions to amperes, volts and watts below.
"""

import math

# ============================================
# Constant Table (CODATA 2018)
# ============================================

HBAR_EV_S = 6.582119569e-16         # eV s
HBAR_J_S = 1.054571817e-34          # J s
SPEED_OF_LIGHT = 2.99792458e8       # m / s
EPSILON_0 = 8.8541878128e-12        # F / m
ELEMENTARY_CHARGE = 1.602176634e-19  # C
BOLTZMANN_EV_K = 8.617333262e-5     # eV / K

JOULE_PER_EV = ELEMENTARY_CHARGE


# ============================================
# Conversions
# ============================================

def rate_to_hz(rate_ev: float) -> float:
    """Convert a rate expressed as an energy (eV) to s^-1."""
    return rate_ev / HBAR_EV_S


def lifetime_to_rate(tau_s: float) -> float:
    """hbar / tau in eV."""
    return HBAR_EV_S / tau_s


def thermal_energy(temperature: float) -> float:
    """k_B T in eV."""
    return BOLTZMANN_EV_K * temperature


def current_amperes(rate_ev: float, population: float) -> float:
    """
    Particle current e * (rate / hbar) * population

    Args:
        rate_ev: Transfer rate in eV
        population: Steady-state population of the source level

    Returns:
        Current in amperes
    """
    return ELEMENTARY_CHARGE * rate_to_hz(rate_ev) * population


def power_watts(current_a: float, voltage_v: float) -> float:
    """P = I V, both already in SI units."""
    return current_a * voltage_v


def energy_ev_to_volts(energy_ev: float) -> float:
    """An energy of x eV per elementary charge is a potential of x volts."""
    return float(energy_ev)


def polygon_circumradius(r_nn: float, n_sites: int) -> float:
    """Circumradius of a regular polygon with side r_nn."""
    if n_sites == 1:
        return 0.0
    return r_nn / (2.0 * math.sin(math.pi / n_sites))
