import pytest

from config import settings
from errors import DimensionError
from schemas import RESULT_COLUMNS
from studies.pool import Outcome
from studies.sweeps import grid_power, outcome_row, scaling_study, strength_row


# ============================================
# Row Flattening
# ============================================

def test_outcome_row_success():
    row = outcome_row(Outcome(0, {"p_net": 1.0}, None), {"n_sites": 3}, ["n_sites", "p_net", "p_in", "status", "error"])
    assert row == {"n_sites": 3, "p_net": 1.0, "p_in": None, "status": "ok", "error": ""}


def test_outcome_row_marks_capped_points_skipped():
    error = DimensionError("too big").to_record()
    row = outcome_row(Outcome(0, None, error), {"n_sites": 9}, ["n_sites", "p_net", "status", "error"])
    assert row["status"] == "skipped" and row["error"] == "dimension_cap_exceeded"
    assert row["n_sites"] == 9 and row["p_net"] is None


def test_outcome_row_marks_other_failures():
    row = outcome_row(Outcome(0, None, {"error": "solver_failure"}), {}, ["status", "error"])
    assert row["status"] == "failed"


# ============================================
# Grid
# ============================================

def test_dimer_grid_is_flat_and_deterministic(make_config):
    config = make_config(2)
    serial = grid_power(config, suppressions=[0.5, 0.99], gamma_rs=[1e-4, 1e-2], workers=1)
    parallel = grid_power(config, suppressions=[0.5, 0.99], gamma_rs=[1e-4, 1e-2], workers=2)
    assert serial.rows == parallel.rows
    assert [(r["suppression"], r["gamma_r"]) for r in serial.rows] == [
        (0.5, 1e-4), (0.5, 1e-2), (0.99, 1e-4), (0.99, 1e-2),
    ]
    assert all(r["status"] == "ok" for r in serial.rows)
    # a dimer has neither a band gap to tune nor a rung to pump
    assert len({r["p_net"] for r in serial.rows}) == 1
    assert list(serial.rows[0]) == RESULT_COLUMNS["grid"]
    assert serial.statistics == {"failed": 0}


# ============================================
# Scaling
# ============================================

def test_strength_scaling_against_closed_forms(make_config):
    result = scaling_study(make_config(2), n_values=[2, 3, 4], mode="strength")
    rows = {r["n_sites"]: r for r in result.rows}
    assert result.study == "scaling_strength"
    assert [rows[n]["dicke_per_site"] for n in (2, 3, 4)] == pytest.approx([1.0, 4 / 3, 1.5])
    assert all(rows[n]["independent_per_site"] == 1.0 for n in (2, 3, 4))
    # with equal pairwise couplings the top single-excitation state is the symmetric one
    assert rows[3]["parallel_strength"] == pytest.approx(4.0, rel=1e-9)
    assert rows[2]["gs_strength"] > 0


def test_strength_cap_marks_rows_skipped(make_config, monkeypatch):
    monkeypatch.setattr(settings, "STRENGTH_MAX_SITES", 3)
    result = scaling_study(make_config(2), n_values=[2, 3, 4], mode="strength")
    assert [r["status"] for r in result.rows] == ["ok", "ok", "skipped"]
    assert result.statistics == {"skipped": 1, "failed": 0}


def test_strength_row_direct_cap(make_config, monkeypatch):
    monkeypatch.setattr(settings, "STRENGTH_MAX_SITES", 2)
    with pytest.raises(DimensionError):
        strength_row(make_config(2), 3)


def test_power_scaling_skips_beyond_cap(make_config, monkeypatch):
    monkeypatch.setattr(settings, "POWER_MAX_SITES", 2)
    result = scaling_study(make_config(2), n_values=[2, 3], mode="power")
    assert result.study == "scaling_power"
    assert [r["status"] for r in result.rows] == ["ok", "skipped"]
    assert result.rows[0]["p_net_per_site"] == pytest.approx(result.rows[0]["p_net"] / 2)


def test_scaling_rejects_unknown_mode(make_config):
    with pytest.raises(ValueError):
        scaling_study(make_config(2), mode="speed")
