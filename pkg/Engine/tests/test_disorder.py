import numpy as np
import pytest

from config import settings
from errors import ConfigurationError, SolverError
from models import DisorderSpec
from studies.disorder import sample_disorder
from studies.pool import Outcome, resolve_workers, run_pool


# ============================================
# Disorder Sampling
# ============================================

def test_zero_fraction_returns_input(pentamer_spec):
    assert sample_disorder(pentamer_spec, DisorderSpec(fraction=0.0, seed=3)) is pentamer_spec


def test_same_seed_same_ring(pentamer_spec):
    a = sample_disorder(pentamer_spec, DisorderSpec(fraction=0.05, seed=11))
    b = sample_disorder(pentamer_spec, DisorderSpec(fraction=0.05, seed=11))
    c = sample_disorder(pentamer_spec, DisorderSpec(fraction=0.05, seed=12))
    assert np.array_equal(a.omega_a, b.omega_a) and np.array_equal(a.positions, b.positions)
    assert not np.array_equal(a.omega_a, c.omega_a)


def test_only_targeted_parameters_change(pentamer_spec):
    spec = sample_disorder(pentamer_spec, DisorderSpec(fraction=0.05, seed=1, targets=frozenset({"omega_a"})))
    assert not np.array_equal(spec.omega_a, pentamer_spec.omega_a)
    assert np.array_equal(spec.tau_l, pentamer_spec.tau_l)
    assert np.array_equal(spec.positions, pentamer_spec.positions)
    assert np.array_equal(spec.theta_zen, pentamer_spec.theta_zen)


def test_spread_matches_fraction(pentamer_spec):
    draws = np.concatenate([
        sample_disorder(pentamer_spec, DisorderSpec(fraction=0.05, seed=s, targets=frozenset({"omega_a"}))).omega_a
        for s in range(400)
    ])
    assert draws.mean() == pytest.approx(1.8, rel=5e-3)
    assert draws.std() == pytest.approx(0.05 * 1.8, rel=0.1)


def test_resampling_cap(pentamer_spec, monkeypatch):
    monkeypatch.setattr(settings, "DISORDER_MAX_RESAMPLES", 0)
    with pytest.raises(ConfigurationError):
        for seed in range(200):
            sample_disorder(pentamer_spec, DisorderSpec(fraction=0.9, seed=seed, targets=frozenset({"tau_l"})))


def test_disorder_spec_validation():
    with pytest.raises(ValueError):
        DisorderSpec(fraction=-0.1)
    with pytest.raises(ValueError):
        DisorderSpec(fraction=0.1, targets=frozenset({"colour"}))


# ============================================
# Worker Pool
# ============================================

def _square_or_fail(x):
    if x == 3:
        raise SolverError("singular", details={"x": x})
    if x == 5:
        raise ValueError("bad point")
    return x * x


@pytest.mark.parametrize("workers", [1, 4])
def test_pool_keeps_input_order_and_captures_failures(workers):
    outcomes = run_pool(_square_or_fail, range(7), workers=workers)
    assert [o.index for o in outcomes] == list(range(7))
    assert [o.value for o in outcomes if o.ok] == [0, 1, 4, 16, 36]
    assert outcomes[3].error["error"] == "solver_failure"
    assert outcomes[5].error["error"] == "ValueError"


def test_pool_does_not_swallow_programming_errors():
    def broken(x):
        raise KeyError(x)

    with pytest.raises(KeyError):
        run_pool(broken, [1], workers=1)


def test_resolve_workers(monkeypatch):
    monkeypatch.setattr(settings, "GSSA_WORKERS", 3)
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2


def test_outcome_ok():
    assert Outcome(0, 1, None).ok
    assert not Outcome(0, None, {"error": "x"}).ok
