import math

import pytest
from pydantic import ValidationError

from config import Settings
from errors import CalibrationError, ConfigurationError, EngineError, SolverError
from models import Tolerances
from schemas import PowerReport, RunConfig


# ============================================
# Run Configuration
# ============================================

def test_minimal_config_defaults():
    config = RunConfig.model_validate({"n_sites": 5})
    assert config.angles() == (math.pi / 2, math.pi / 4)
    assert config.ladder_convention() == "guide_slide"
    assert config.bandgap_side() == "below"
    assert config.suppression() == 0.99
    assert config.coupled()
    assert config.phonon_multiplier() == 1e3
    assert config.seed == 0 and config.workers is None


def test_parallel_preset():
    config = RunConfig.model_validate({"n_sites": 4, "configuration": "parallel"})
    assert config.angles() == (math.pi / 2, math.pi / 2)
    assert config.ladder_convention() == "parallel"
    assert config.bandgap_side() == "above"
    assert config.suppression() == 0.999


def test_dicke_preset_is_uncoupled():
    assert not RunConfig.model_validate({"n_sites": 4, "configuration": "dicke"}).coupled()


def test_explicit_values_override_presets():
    config = RunConfig.model_validate({
        "n_sites": 4,
        "ring": {"theta_zen": 0.3},
        "ladder": "parallel",
        "environment": {"optical": {"suppression": 0.5}},
    })
    assert config.angles()[1] == 0.3
    assert config.bandgap_side() == "above"
    assert config.suppression() == 0.5


def test_bandgap_off_means_no_suppression():
    config = RunConfig.model_validate({"n_sites": 4, "environment": {"optical": {"bandgap": False}}})
    assert config.suppression() == 0.0


@pytest.mark.parametrize("data", [
    {"n_sites": 0},
    {"n_sites": 3, "unknown": 1},
    {"n_sites": 3, "ring": {"tau_l": -1.0}},
    {"n_sites": 3, "ring": {"theta_zen": 2.0}},
    {"n_sites": 3, "environment": {"optical": {"suppression": 1.5}}},
    {"n_sites": 3, "configuration": "custom", "ring": {"theta_eq": 0.1}},
    {"n_sites": 3, "environment": {"phonon": {"model": "superohmic"}}},
    {"n_sites": 3, "disorder": {"fraction": 1.0}},
    {"n_sites": 3, "seed": -1},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(data)


def test_superohmic_parameters():
    config = RunConfig.model_validate({
        "n_sites": 3,
        "environment": {"phonon": {"model": "superohmic", "preset": "molecular_a", "omega_crit": 0.05}},
    })
    assert config.environment.phonon.superohmic_parameters() == (5e-3, 0.05)


def test_with_updates_revalidates():
    config = RunConfig.model_validate({"n_sites": 3})
    updated = config.with_updates({"ring.tau_l": 1e-9, "seed": 7})
    assert updated.ring.tau_l == 1e-9 and updated.seed == 7
    assert config.ring.tau_l == 2.5e-9
    with pytest.raises(KeyError):
        config.with_updates({"ring.colour": 1})
    with pytest.raises(ValidationError):
        config.with_updates({"ring.tau_l": -1.0})


def test_config_survives_json_round_trip():
    config = RunConfig.model_validate({
        "n_sites": 4,
        "configuration": "custom",
        "ring": {"theta_eq": 1.2, "theta_zen": 0.4, "tau_l": 1e-9},
        "reinit": {"scheme": "site", "gamma_r": 1e-4, "gamma_r_scan": [1e-6, 1e-4]},
        "environment": {"phonon": {"model": "superohmic", "preset": "molecular_b"}},
        "disorder": {"fraction": 0.05, "targets": ["omega_a", "angles"], "trials": 10},
        "axes": {"suppression": [0.9, 0.99], "n_values": [2, 5]},
        "tolerances": {"residual": 1e-9},
        "seed": 2 ** 63,
        "workers": 3,
    })
    assert RunConfig.model_validate_json(config.model_dump_json()) == config


def test_convention_left_open_when_angles_leave_the_preset():
    custom = RunConfig.model_validate({"n_sites": 4, "configuration": "custom", "ring": {"theta_eq": 0.0, "theta_zen": 0.2}})
    assert custom.ladder_convention() is None
    assert custom.bandgap_side("parallel") == "above"
    assert custom.bandgap_side("guide_slide") == "below"
    tilted = RunConfig.model_validate({"n_sites": 4, "ring": {"theta_zen": 0.3}})
    assert tilted.ladder_convention() is None


# ============================================
# Reports & Settings
# ============================================

def test_power_report_row():
    report = PowerReport(
        n_sites=4, gamma_t_star=1e-3, current=1e-6, voltage=1.0, p_out=1e-6, p_in=4e-7,
        p_net=6e-7, rho_alpha=0.2, rho_beta=0.8, rung_currents=[1.0],
    )
    row = report.row()
    assert row["p_net_per_site"] == pytest.approx(1.5e-7)
    assert "rung_currents" not in row


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("GSSA_WORKERS", "4")
    monkeypatch.setenv("RESIDUAL_TOL", "1e-6")
    settings = Settings()
    assert settings.GSSA_WORKERS == 4 and settings.RESIDUAL_TOL == 1e-6


def test_tolerance_overrides():
    tol = Tolerances.from_settings(Settings(), {"residual": 1e-4, "trace": None})
    assert tol.residual == 1e-4
    assert tol.trace == Settings().TRACE_TOL


# ============================================
# Errors
# ============================================

def test_error_records():
    record = ConfigurationError("bad field", details={"field": "n_sites"}).to_record()
    assert record == {
        "error": "invalid_configuration",
        "type": "ConfigurationError",
        "message": "bad field",
        "details": {"field": "n_sites"},
    }


def test_error_hierarchy():
    assert issubclass(CalibrationError, ValueError) and issubclass(CalibrationError, EngineError)
    assert issubclass(SolverError, RuntimeError)
    assert EngineError("x").details == {}
