"""
Disorder sampling
Draws a perturbed copy of a ring from seeded normal distributions.
"""

import logging
from dataclasses import replace
from typing import Optional

import numpy as np

from config import settings
from errors import ConfigurationError
from models import DisorderSpec, RingSpec

logger = logging.getLogger(__name__)


def _positive_normal(rng: np.random.Generator, mean: np.ndarray, sigma: np.ndarray, name: str) -> np.ndarray:
    """Normal draws, redrawing any non-positive entry."""
    values = rng.normal(mean, sigma)
    bad = values <= 0
    attempts = 0
    while bad.any():
        if attempts == settings.DISORDER_MAX_RESAMPLES:
            raise ConfigurationError(
                f"Disorder resampling of {name} exceeded {settings.DISORDER_MAX_RESAMPLES} attempts",
                details={"parameter": name},
            )
        values[bad] = rng.normal(mean[bad], sigma[bad])
        bad = values <= 0
        attempts += 1
    return values


def sample_disorder(spec: RingSpec, disorder: DisorderSpec, rng: Optional[np.random.Generator] = None) -> RingSpec:
    """
    Disordered copy of a ring

    Scalars (omega_a, tau_l, both angles) are drawn from Normal(value,
    fraction * value); positions get independent per-component noise with
    standard deviation fraction * r_nn. Draw order is fixed, so the result
    depends only on the seed.

    Args:
        spec: Nominal ring
        disorder: Fraction, seed and targeted parameters
        rng: Generator to draw from instead of one seeded from disorder.seed

    Returns:
        New RingSpec (the input when fraction is zero)

    Raises:
        ConfigurationError: If positive parameters cannot be drawn
    """
    if disorder.fraction == 0:
        return spec
    if disorder.fraction >= 1:
        raise ValueError("Disorder fraction must be < 1")
    rng = rng or np.random.default_rng(disorder.seed)
    f = disorder.fraction
    updates = {}

    if "omega_a" in disorder.targets:
        updates["omega_a"] = _positive_normal(rng, spec.omega_a, f * spec.omega_a, "omega_a")
    if "tau_l" in disorder.targets:
        updates["tau_l"] = _positive_normal(rng, spec.tau_l, f * spec.tau_l, "tau_l")
    if "positions" in disorder.targets:
        updates["positions"] = spec.positions + rng.normal(0.0, f * spec.r_nn, size=spec.positions.shape)
    if "angles" in disorder.targets:
        updates["theta_eq"] = rng.normal(spec.theta_eq, f * np.abs(spec.theta_eq))
        updates["theta_zen"] = rng.normal(spec.theta_zen, f * np.abs(spec.theta_zen))
    return replace(spec, **updates)
