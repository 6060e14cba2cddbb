import numpy as np
import pytest

from constants import thermal_energy
from studies.spectrum import (
    _analysis,
    classify_transitions,
    ladder_metrics,
    ladder_structure,
    ladder_threshold,
    process_map,
    spectrum_histogram,
)


# ============================================
# Transition Classes
# ============================================

def test_pentamer_good_and_bad_bands_separate(make_config):
    rows = classify_transitions(make_config(5))
    good = [r["omega"] for r in rows if r["klass"] == "good"]
    bad = [r["omega"] for r in rows if r["klass"] == "bad"]
    assert good and bad
    assert min(good) > max(bad)
    assert max(r["dipole_sq"] for r in rows) == pytest.approx(1.0)


def test_good_transitions_leave_the_btts(make_config):
    config = make_config(5)
    analysis = _analysis(config)
    rows = classify_transitions(config, analysis)
    assert {r["source"] for r in rows if r["klass"] == "good"} == {analysis.target.btts}
    assert any(r["target"] == analysis.target.ttts and r["klass"] == "good" for r in rows)


def test_single_site_has_one_good_transition(make_config):
    rows = classify_transitions(make_config(1))
    assert [r["klass"] for r in rows] == ["good"]


# ============================================
# Histograms
# ============================================

def test_histogram_layout(make_config):
    result = spectrum_histogram(make_config(4), bins=10)
    optical = [r for r in result.rows if r["bath"] == "optical"]
    phonon = [r for r in result.rows if r["bath"] == "phonon"]
    assert result.study == "spectrum"
    assert len(optical) == 30 and len(phonon) == 10
    assert sum(r["weight"] for r in phonon) == pytest.approx(1.0)
    assert result.statistics["n_transitions"] == len(result.metadata["transitions"])
    assert result.statistics["cutoff"] == pytest.approx(
        0.5 * (result.statistics["omega_good"] + result.statistics["omega_bad"])
    )
    assert set(result.statistics["superohmic_overlap"]) == {"molecular_a", "molecular_b"}
    assert all(v > 0 for v in result.statistics["superohmic_overlap"].values())


def test_single_site_has_no_phonon_histogram(make_config):
    result = spectrum_histogram(make_config(1), bins=5)
    assert all(r["bath"] == "optical" for r in result.rows)
    assert result.statistics["n_phonon_transitions"] == 0
    assert result.statistics["cutoff"] is None
    assert result.statistics["superohmic_overlap"] == {}


# ============================================
# Process Map
# ============================================

def test_process_map_rows(make_config):
    result = process_map(make_config(3))
    assert result.study == "processmap"
    assert all(r["omega"] > 0 for r in result.rows)
    for r in result.rows:
        step = r["source_manifold"] - r["target_manifold"]
        assert step == (1 if r["bath"] == "optical" else 0)
    for key in [("optical", -1), ("phonon", 0), ("phonon", 1), ("phonon", 2)]:
        strengths = [r["relative_strength"] for r in result.rows if (r["bath"], r["site"]) == key]
        assert max(strengths) == pytest.approx(1.0)
    assert len(result.statistics["ladder"]) == 4


# ============================================
# Ladder Structure
# ============================================

def test_guide_slide_ladder_is_pinned_below(make_config):
    structure = ladder_structure(_analysis(make_config(5)), threshold=1e-12)
    inner = [m for m in structure["manifolds"] if "pinned_min" in m]
    assert [m["manifold"] for m in inner] == [1, 2, 3, 4]
    assert all(m["pinned_min"] > 0 for m in inner)
    assert not structure["near_any"]


def test_large_threshold_flags_near_states(make_config):
    assert ladder_structure(_analysis(make_config(4)), threshold=10.0)["near_any"]


def test_ladder_threshold_defaults_to_thermal_energy(make_config):
    assert ladder_threshold(make_config(3)) == pytest.approx(thermal_energy(300.0))
    assert ladder_threshold(make_config(3, study={"near_threshold": 0.01})) == 0.01


def test_ladder_metrics_keys(make_config):
    metrics = ladder_metrics(make_config(3))
    assert {"near_any", "ladder_0", "ladder_3", "pinned_min_1", "min_gap_2"} <= set(metrics)
    assert "pinned_min_0" not in metrics
    assert isinstance(metrics["near_any"], bool)
    assert np.isfinite(metrics["ladder_1"])
