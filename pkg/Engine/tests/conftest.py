"""
Shared fixtures for the engine test suite
"""

import math

import numpy as np
import pytest

from geometry import build_ring_spec
from schemas import RunConfig


@pytest.fixture
def make_config():
    """Factory for validated run configs; keyword arguments are merged into the JSON mapping."""
    def factory(n_sites: int = 2, **sections) -> RunConfig:
        data = {"n_sites": n_sites}
        data.update(sections)
        return RunConfig.model_validate(data)
    return factory


@pytest.fixture
def pentamer_spec():
    return build_ring_spec(5)


@pytest.fixture
def quadmer_spec():
    return build_ring_spec(4)


@pytest.fixture
def parallel_spec():
    """Dipoles along the ring normal."""
    def factory(n_sites: int):
        return build_ring_spec(n_sites, theta_eq=math.pi / 2, theta_zen=math.pi / 2)
    return factory


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T
