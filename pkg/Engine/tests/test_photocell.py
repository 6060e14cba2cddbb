import math

import numpy as np
import pytest

from config import settings
from dissipators import trace_violation
from errors import DimensionError
from hamiltonian import single_site_strength, target_strength, transition_table
from heatengine import power_at, trap_populations
from liouvillian import steady_state
from photocell import analyse_ring, build_model, ring_spec_from_config, solve_config
from schemas import POWER_COLUMNS, SUPEROHMIC_PRESETS

from conftest import random_density


# ============================================
# Model Construction
# ============================================

def test_dimer_model_layout(make_config):
    model = build_model(make_config(2))
    assert model.basis.has_trap and model.basis.dim == 8
    assert model.omega_t == pytest.approx(model.target.omega_good)
    assert model.trap.omega_t == model.omega_t
    assert model.optical.bandgap is None


def test_superoperators_preserve_trace(make_config):
    model = build_model(make_config(2))
    scale = abs(model.base.superop).max()
    assert trace_violation(model.base.superop, 8) < 1e-10 * scale
    assert trace_violation(model.load, 8) < 1e-12


def test_liouvillian_is_linear_in_load(make_config):
    model = build_model(make_config(2))
    diff = model.liouvillian(2e-3).superop - model.liouvillian(1e-3).superop
    assert abs(diff - 1e-3 * model.load).max() < 1e-12


def test_power_model_site_cap(make_config, monkeypatch):
    monkeypatch.setattr(settings, "POWER_MAX_SITES", 1)
    with pytest.raises(DimensionError):
        build_model(make_config(2))


def test_spec_from_config_uses_preset_angles(make_config):
    spec = ring_spec_from_config(make_config(3, configuration="parallel"))
    assert np.allclose(spec.theta_zen, np.pi / 2)
    assert ring_spec_from_config(make_config(3), n_sites=4).n_sites == 4


def test_dicke_configuration_is_uncoupled(make_config):
    model = build_model(make_config(2, configuration="dicke"))
    assert not model.analysis.couplings.j.any()


def test_trimer_bandgap_cutoff(make_config):
    model = build_model(make_config(3))
    gap = model.optical.bandgap
    assert gap.side == "below" and gap.suppression == 0.99
    assert gap.cutoff == pytest.approx(0.5 * (model.target.omega_good + model.target.omega_bad))


def test_bandgap_switch(make_config):
    config = make_config(3, environment={"optical": {"bandgap": False}})
    assert build_model(config).optical.bandgap is None


# ============================================
# Phonon Regimes
# ============================================

def test_phonon_regime_off(make_config):
    model = build_model(make_config(2, environment={"phonon": {"regime": "off"}}))
    assert model.phonon.kappa_vib == 0.0


def test_calibrated_regimes_scale(make_config):
    fast = build_model(make_config(2)).phonon.kappa_vib
    slow = build_model(make_config(2, environment={"phonon": {"regime": "slow"}})).phonon.kappa_vib
    assert fast / slow == pytest.approx(1e6)


def test_explicit_kappa_overrides_calibration(make_config):
    model = build_model(make_config(2, environment={"phonon": {"kappa_vib": 0.5}}))
    assert model.phonon.kappa_vib == 0.5


def test_superohmic_preset(make_config):
    model = build_model(make_config(2, environment={"phonon": {"model": "superohmic", "preset": "molecular_b"}}))
    lam, wc = SUPEROHMIC_PRESETS["molecular_b"]
    assert model.phonon.model == "superohmic"
    assert model.phonon.reorganisation == lam and model.phonon.omega_crit == wc


# ============================================
# Solving & Power Accounting
# ============================================

def test_steady_state_is_valid(make_config):
    model = build_model(make_config(2))
    state = model.solve(1e-3)
    assert state.diagnostics.passed
    pops = trap_populations(state.rho, model.basis)
    assert pops.alpha + pops.beta == pytest.approx(1.0)
    assert 0.0 < pops.alpha < 1.0


def test_fixed_load_report(make_config):
    model = build_model(make_config(2))
    report = model.power_report(gamma_t=1e-3)
    assert report.gamma_t_star == 1e-3
    # a dimer has no rung below the BTTS to pump
    assert report.p_in == 0.0 and report.rung_currents == []
    assert report.p_net == pytest.approx(report.p_out - report.p_in)
    assert set(POWER_COLUMNS) <= set(report.row())


def test_optimised_load_beats_fixed_loads(make_config):
    model = build_model(make_config(2))
    report = model.power_report()
    assert settings.LOAD_SCAN_MIN <= report.gamma_t_star <= settings.LOAD_SCAN_MAX
    for gamma_t in (1e-9, 1e-6, 1e-3):
        assert report.p_out >= power_at(model, gamma_t).power - 1e-3 * abs(report.p_out)


def test_site_scheme_charges_input_power(make_config):
    model = build_model(make_config(2, reinit={"scheme": "site", "gamma_r": 1e-4}))
    report = model.power_report(gamma_t=1e-3)
    assert report.scheme == "site"
    assert len(report.site_currents) == 2
    assert report.p_in > 0.0


def test_trimer_ladder_pumps_ground_rung(make_config):
    model = build_model(make_config(3))
    report = model.power_report(gamma_t=1e-3)
    assert len(report.rung_currents) == 1
    assert report.p_in > 0.0


def test_coherent_extraction_model(make_config):
    model = build_model(make_config(2, trap={"mode": "coherent", "c_x": 1e-4}))
    assert model.basis.dim == 8
    assert model.solve(1e-3).diagnostics.passed


def test_solve_config_optimises_gamma_r(make_config):
    config = make_config(2, reinit={"optimize": True, "gamma_r_scan": [1e-4, 1e-2]})
    report = solve_config(config)
    assert report.gamma_r in (1e-4, 1e-2)


def test_analyse_ring_drops_trap(pentamer_spec):
    analysis = analyse_ring(pentamer_spec, "guide_slide")
    assert analysis.spec.trap is None
    assert analysis.basis.dim == 32


# ============================================
# Ladder Convention
# ============================================

def test_convention_follows_normal_dipoles(make_config):
    config = make_config(4).with_updates({"ring.theta_zen": math.pi / 2})
    assert config.ladder_convention() is None
    analysis = analyse_ring(ring_spec_from_config(config), config.ladder_convention())
    basis, target = analysis.basis, analysis.target
    assert basis.convention == "parallel"
    assert config.bandgap_side(basis.convention) == "above"
    assert basis.energies[target.btts] == basis.energies[basis.manifold_indices(1)].max()
    table = transition_table(basis, analysis.spec)
    single = single_site_strength(1.8, 2.5e-9, "dipole_sq")
    assert target_strength(basis, table, "dipole_sq") / single == pytest.approx(6.0, rel=1e-9)


def test_model_bandgap_side_follows_angles(make_config):
    model = build_model(make_config(3).with_updates({"ring.theta_zen": math.pi / 2}))
    assert model.ring.convention == "parallel"
    assert model.optical.bandgap.side == "above"


def test_preset_angles_keep_preset_convention(make_config):
    config = make_config(4).with_updates({"ring.theta_zen": math.pi / 4})
    assert config.ladder_convention() == "guide_slide"
    pinned = make_config(4, ladder="guide_slide").with_updates({"ring.theta_zen": math.pi / 2})
    assert analyse_ring(ring_spec_from_config(pinned), pinned.ladder_convention()).basis.convention == "guide_slide"


# ============================================
# Steady-State Kernel
# ============================================

@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_guide_slide_kernel_is_unique(make_config, n_sites):
    state = build_model(make_config(n_sites)).solve(1e-4)
    assert state.kernel_dim == 1
    assert state.diagnostics.passed


def test_steady_state_independent_of_initial_state(make_config, rng):
    model = build_model(make_config(2))
    reference = model.solve(1e-3).rho
    state = steady_state(model.liouvillian(1e-3), initial=random_density(rng, 8), tolerances=model.tolerances)
    assert np.allclose(state.rho, reference, atol=1e-10)


def test_parallel_without_phonons_has_degenerate_kernel(make_config):
    config = make_config(4, configuration="parallel", environment={"phonon": {"regime": "off"}})
    model = build_model(config)
    for gamma_t in (1e-6, 1e-2):
        state = model.solve(gamma_t)
        assert state.method == "kernel" and state.kernel_dim > 1
        assert state.diagnostics.passed
        assert state.diagnostics.min_eigenvalue >= -settings.POSITIVITY_TOL
