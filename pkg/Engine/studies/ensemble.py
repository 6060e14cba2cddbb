"""
Disorder ensembles
Repeats a study kind (power, strength or ladder structure) over seeded
disordered copies of the ring and aggregates per-trial metrics in trial order.
"""

import logging
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from hamiltonian import dicke_strength, single_site_strength, target_is_strongest, target_strength
from models import DisorderSpec, RingSpec, SweepResult
from photocell import analyse_ring, ring_spec_from_config, ring_transitions, solve_config
from schemas import RunConfig
from studies.disorder import sample_disorder
from studies.pool import run_pool
from studies.spectrum import ladder_metrics
from studies.sweeps import STRENGTH_WEIGHTING, outcome_row

logger = logging.getLogger(__name__)

QUANTILES = {"q05": 0.05, "q25": 0.25, "q50": 0.5, "q75": 0.75, "q95": 0.95}


# ============================================
# Per-trial Metrics
# ============================================

def strength_metrics(config: RunConfig, spec: RingSpec) -> Dict[str, Any]:
    """Target strength (single-dipole units and relative to Dicke), strongest flag and gap."""
    analysis = analyse_ring(spec, config.ladder_convention(), config.coupled())
    table = ring_transitions(analysis)
    single = single_site_strength(config.ring.omega_a, config.ring.tau_l, STRENGTH_WEIGHTING)
    strength = target_strength(analysis.basis, table, STRENGTH_WEIGHTING) / single
    target = analysis.target
    dicke = dicke_strength(spec.n_sites, target.rung, 1.0)
    return {
        "strength": strength,
        "strength_over_dicke": strength / dicke,
        "strength_over_independent": strength / spec.n_sites,
        "strongest": target_is_strongest(analysis.basis, table, STRENGTH_WEIGHTING),
        "gap": target.omega_good - target.omega_bad if target.omega_bad is not None else None,
    }


def power_metrics(config: RunConfig, spec: RingSpec) -> Dict[str, Any]:
    report = solve_config(config, spec)
    return {
        "p_net": report.p_net,
        "p_net_per_site": report.p_net_per_site,
        "p_out": report.p_out,
        "p_in": report.p_in,
        "gamma_t_star": report.gamma_t_star,
    }


TRIAL_METRICS: Dict[str, Callable[[RunConfig, RingSpec], Dict[str, Any]]] = {
    "strength": strength_metrics,
    "power": power_metrics,
    "ladder": ladder_metrics,
}


# ============================================
# Aggregation
# ============================================

def summarize(rows: List[Dict[str, Any]], keys: List[str]) -> Dict[str, Any]:
    """
    Mean, std and quantiles of numeric metrics over successful trials;
    boolean metrics are reported as the fraction of trials where they hold.
    """
    ok = [r for r in rows if r["status"] == "ok"]
    summary: Dict[str, Any] = {"n_ok": len(ok), "n_failed": len(rows) - len(ok)}
    for key in keys:
        values = [r[key] for r in ok if r.get(key) is not None]
        if not values:
            continue
        if all(isinstance(v, (bool, np.bool_)) for v in values):
            summary[key] = {"fraction": float(np.mean(values))}
            continue
        data = np.asarray(values, dtype=float)
        stats = {"mean": float(data.mean()), "std": float(data.std(ddof=1)) if data.size > 1 else 0.0}
        stats.update({name: float(np.quantile(data, q)) for name, q in QUANTILES.items()})
        summary[key] = stats
    return summary


def ensemble(
    config: RunConfig,
    kind: Optional[str] = None,
    fraction: Optional[float] = None,
    trials: Optional[int] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Run `kind` on `trials` disordered rings

    Trial i draws from a generator seeded with config.seed + i, so each row
    depends only on its own seed and not on scheduling. Failed trials are
    kept as rows with their error code and excluded from the statistics.

    Args:
        config: Nominal run configuration
        kind: "power", "strength" or "ladder" (config.study.kind when omitted)
        fraction: Relative disorder (config.disorder.fraction when omitted)
        trials: Number of trials (config.disorder.trials when omitted)
        workers: Worker threads

    Returns:
        SweepResult with one row per trial and aggregated statistics
    """
    kind = kind or config.study.kind
    if kind not in TRIAL_METRICS:
        raise ValueError(f"Unknown ensemble kind: {kind}")
    fraction = config.disorder.fraction if fraction is None else fraction
    trials = config.disorder.trials if trials is None else trials
    if trials < 1:
        raise ValueError("An ensemble needs at least one trial")
    metric = TRIAL_METRICS[kind]
    nominal = ring_spec_from_config(config)
    targets = frozenset(config.disorder.targets)
    seeds = [config.seed + i for i in range(trials)]
    logger.info(f"Ensemble ({kind}): N={config.n_sites}, fraction={fraction}, {trials} trials")

    def evaluate(seed: int) -> Dict[str, Any]:
        disorder = DisorderSpec(fraction=fraction, seed=seed, targets=targets)
        return metric(config, sample_disorder(nominal, disorder))

    started = time.perf_counter()
    outcomes = run_pool(evaluate, seeds, workers or config.workers)
    keys = sorted({k for o in outcomes if o.ok for k in o.value})
    columns = ["trial", "seed"] + keys + ["status", "error"]
    rows = [outcome_row(o, {"trial": i, "seed": s}, columns) for i, (o, s) in enumerate(zip(outcomes, seeds))]
    logger.info(f"Ensemble finished in {time.perf_counter() - started:.1f}s")

    statistics = summarize(rows, keys)
    if statistics["n_failed"]:
        logger.warning(f"{statistics['n_failed']} of {trials} trials failed")
    return SweepResult(
        study=f"ensemble_{kind}",
        axes={"trial": list(range(trials))},
        rows=rows,
        statistics=statistics,
        seed=config.seed,
        metadata={"kind": kind, "fraction": fraction, "columns": columns},
    )
