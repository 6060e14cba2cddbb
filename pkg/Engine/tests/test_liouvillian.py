import math

import numpy as np
import pytest
import scipy.sparse as sp

from config import settings
from constants import BOLTZMANN_EV_K
from dissipators import lindblad, optical_tensor, reinit_site
from environment import optical_kappa
from errors import DimensionError, SolverError
from geometry import build_ring_spec
from liouvillian import assemble, kernel_cutoff, steady_state, unitary_superop, unvectorize, validate, vectorize
from models import DissipatorBlock, OpticalBath, Tolerances
from photocell import analyse_ring

from conftest import random_density, random_hermitian


def _two_level():
    spec = build_ring_spec(1)
    basis = analyse_ring(spec, "guide_slide").basis
    bath = OpticalBath(temperature=5800.0, kappa_opt=optical_kappa(1.8, 2.5e-9))
    return assemble(np.diag(basis.energies), [optical_tensor(basis, spec, bath)])


# ============================================
# Assembly
# ============================================

def test_unitary_part_is_commutator(rng):
    h = random_hermitian(rng, 3)
    rho = random_density(rng, 3)
    result = unvectorize(unitary_superop(h) @ vectorize(rho), 3)
    assert np.allclose(result, -1j * (h @ rho - rho @ h), atol=1e-12)


def test_vectorize_is_column_stacking():
    rho = np.array([[1, 2], [3, 4]])
    assert list(vectorize(rho)) == [1, 3, 2, 4]
    assert np.array_equal(unvectorize(vectorize(rho), 2), rho)


def test_assemble_rejects_mismatched_block():
    block = DissipatorBlock(superop=sp.csr_matrix((16, 16), dtype=complex), label="wrong")
    with pytest.raises(DimensionError):
        assemble(np.eye(2), [block])


def test_assemble_warns_on_trace_violation(caplog):
    leak = sp.csr_matrix(np.diag([-1.0, 0.0, 0.0, 0.0]).astype(complex))
    assemble(np.zeros((2, 2)), [DissipatorBlock(superop=leak, label="leak")])
    assert any("does not preserve trace" in r.getMessage() for r in caplog.records)


# ============================================
# Steady State
# ============================================

def test_two_level_detailed_balance():
    state = steady_state(_two_level())
    ratio = state.rho[1, 1].real / state.rho[0, 0].real
    assert state.method == "bordered" and state.kernel_dim == 1
    assert ratio == pytest.approx(math.exp(-1.8 / (BOLTZMANN_EV_K * 5800.0)), rel=1e-6)
    assert state.diagnostics.passed


def test_inverse_power_agrees_with_bordered(monkeypatch):
    reference = steady_state(_two_level()).rho
    monkeypatch.setattr(settings, "DIRECT_SOLVER_MAX_DIM", 1)
    state = steady_state(_two_level())
    assert state.method == "inverse_power"
    assert np.allclose(state.rho, reference, atol=1e-9)


def test_degenerate_kernel_projects_initial_state():
    liouvillian = assemble(np.diag([-1.0, 1.0]), [])
    state = steady_state(liouvillian)
    assert state.method == "kernel" and state.kernel_dim == 2
    assert np.allclose(state.rho, np.diag([1.0, 0.0]), atol=1e-10)

    excited = np.diag([0.0, 1.0]).astype(complex)
    state = steady_state(liouvillian, initial=excited)
    assert np.allclose(state.rho, excited, atol=1e-10)


def test_degenerate_kernel_over_dense_cap(monkeypatch):
    monkeypatch.setattr(settings, "DENSE_KERNEL_MAX_DIM", 1)
    with pytest.raises(SolverError):
        steady_state(assemble(np.diag([-1.0, 1.0]), []))


def _lowering(dim: int, to_level: int, from_level: int) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    op[to_level, from_level] = 1.0
    return op


def test_kernel_cutoff_is_capped_by_slowest_decay():
    liouvillian = assemble(np.diag([-0.5, 0.5]), [DissipatorBlock(lindblad(_lowering(2, 0, 1), 1e-9), "decay")])
    assert kernel_cutoff(liouvillian.superop, 1.0, 1e-10) == pytest.approx(5e-12)


def test_kernel_cutoff_without_dissipation_is_relative():
    liouvillian = assemble(np.diag([-1.0, 1.0]), [])
    cutoff = kernel_cutoff(liouvillian.superop, 2.0, 1e-12)
    assert cutoff == pytest.approx(2e-12)


def test_slow_decay_is_not_part_of_the_kernel():
    # level 1 is isolated, level 2 decays into level 0 far slower than the eV-scale unitary part
    block = DissipatorBlock(lindblad(_lowering(3, 0, 2), 1e-12), "slow")
    liouvillian = assemble(np.diag([0.0, 1.0, 2.0]), [block])
    tolerances = Tolerances.from_settings(settings, {"kernel": 1e-10})
    top = np.diag([0.0, 0.0, 1.0]).astype(complex)
    state = steady_state(liouvillian, initial=top, tolerances=tolerances)
    assert state.method == "kernel" and state.kernel_dim == 2
    assert np.allclose(state.rho, np.diag([1.0, 0.0, 0.0]), atol=1e-8)
    assert state.diagnostics.passed


def test_unique_steady_state_ignores_initial_state(rng):
    reference = steady_state(_two_level()).rho
    state = steady_state(_two_level(), initial=random_density(rng, 2))
    assert state.kernel_dim == 1
    assert np.allclose(state.rho, reference, atol=1e-12)


def test_pumped_two_level_is_fully_excited():
    basis = analyse_ring(build_ring_spec(1), "guide_slide").basis
    liouvillian = assemble(np.diag(basis.energies), [reinit_site(basis, 1, 1e-3)])
    state = steady_state(liouvillian)
    assert np.allclose(state.rho, np.diag([0.0, 1.0]), atol=1e-10)


# ============================================
# Validation
# ============================================

def test_validate_accepts_density_matrix(rng):
    diagnostics = validate(random_density(rng, 4))
    assert diagnostics.passed
    assert diagnostics.as_dict()["trace_dev"] < 1e-12


def test_validate_flags_negative_eigenvalue():
    diagnostics = validate(np.diag([1.5, -0.5]))
    assert not diagnostics.passed
    assert diagnostics.min_eigenvalue == pytest.approx(-0.5)


def test_validate_flags_trace():
    assert not validate(np.diag([0.5, 0.4])).passed
