"""
Parameter sweeps
Suppression x reinitialisation power grids and ring-size scaling (power or
Hamiltonian-only strength).
"""

import logging
import time
from typing import Any, Dict, Optional, Sequence

from config import settings
from errors import DimensionError
from geometry import build_ring_spec
from hamiltonian import dicke_strength, single_site_strength, target_rung, target_strength, transition_table
from models import SweepResult
from photocell import analyse_ring, ring_spec_from_config, solve_config
from schemas import CONFIGURATION_PRESETS, POWER_COLUMNS, RunConfig
from studies.pool import Outcome, run_pool

logger = logging.getLogger(__name__)

STRENGTH_WEIGHTING = "dipole_sq"


def outcome_row(outcome: Outcome, keys: Dict[str, Any], columns: Sequence[str]) -> Dict[str, Any]:
    """Flatten one pool outcome into a CSV row; failed points keep their keys and error code."""
    row = {column: None for column in columns}
    row.update(keys)
    if outcome.ok:
        row.update(outcome.value)
        row["status"] = "ok"
        row["error"] = ""
    else:
        row["status"] = "skipped" if outcome.error.get("error") == DimensionError.code else "failed"
        row["error"] = outcome.error.get("error", "")
    return row


def _power_metrics(config: RunConfig) -> Dict[str, Any]:
    return solve_config(config).row()


# ============================================
# Suppression x Reinitialisation Grid
# ============================================

def grid_power(
    config: RunConfig,
    suppressions: Optional[Sequence[float]] = None,
    gamma_rs: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """Load-optimised net power over a suppression x gamma_r grid."""
    suppressions = list(suppressions or config.axes.suppression)
    gamma_rs = list(gamma_rs or config.axes.gamma_r)
    points = [(s, g) for s in suppressions for g in gamma_rs]
    logger.info(f"Grid study: N={config.n_sites}, {len(suppressions)} x {len(gamma_rs)} points")

    def evaluate(point):
        s, g = point
        return _power_metrics(config.with_updates({
            "environment.optical.suppression": s,
            "environment.optical.bandgap": True,
            "reinit.gamma_r": g,
            "reinit.optimize": False,
        }))

    started = time.perf_counter()
    outcomes = run_pool(evaluate, points, workers or config.workers)
    columns = ["suppression"] + POWER_COLUMNS + ["status", "error"]
    rows = [outcome_row(o, {"suppression": s, "gamma_r": g}, columns) for o, (s, g) in zip(outcomes, points)]
    logger.info(f"Grid study finished in {time.perf_counter() - started:.1f}s")
    return SweepResult(
        study="grid",
        axes={"suppression": suppressions, "gamma_r": gamma_rs},
        rows=rows,
        statistics={"failed": sum(not o.ok for o in outcomes)},
        seed=config.seed,
    )


# ============================================
# Scaling With Ring Size
# ============================================

def strength_row(config: RunConfig, n_sites: int) -> Dict[str, float]:
    """
    Target strengths at one ring size, in units of a single dipole

    GS uses the configured angles, ||-SA all dipoles along the ring normal,
    Dicke the closed form at the target rung, and the independent line N.
    """
    if n_sites > settings.STRENGTH_MAX_SITES:
        raise DimensionError(
            f"Strength study limited to {settings.STRENGTH_MAX_SITES} sites",
            details={"n_sites": n_sites, "cap": settings.STRENGTH_MAX_SITES},
        )
    single = single_site_strength(config.ring.omega_a, config.ring.tau_l, STRENGTH_WEIGHTING)

    def ring_strength(spec, convention: Optional[str]) -> float:
        analysis = analyse_ring(spec, convention, coupled=True)
        table = transition_table(analysis.basis, analysis.spec)
        return target_strength(analysis.basis, table, STRENGTH_WEIGHTING) / single

    gs = ring_strength(ring_spec_from_config(config, n_sites), config.ladder_convention())
    eq, zen = CONFIGURATION_PRESETS["parallel"][:2]
    parallel_spec = build_ring_spec(
        n_sites, config.ring.omega_a, config.ring.tau_l, config.ring.r_nn, theta_eq=eq, theta_zen=zen
    )
    parallel = ring_strength(parallel_spec, "parallel")
    dicke = dicke_strength(n_sites, target_rung(n_sites), 1.0)
    return {
        "gs_strength": gs,
        "parallel_strength": parallel,
        "dicke_strength": dicke,
        "independent_strength": float(n_sites),
        "gs_per_site": gs / n_sites,
        "parallel_per_site": parallel / n_sites,
        "dicke_per_site": dicke / n_sites,
        "independent_per_site": 1.0,
    }


STRENGTH_COLUMNS = [
    "n_sites", "gs_strength", "parallel_strength", "dicke_strength", "independent_strength",
    "gs_per_site", "parallel_per_site", "dicke_per_site", "independent_per_site", "status", "error",
]


def scaling_study(
    config: RunConfig,
    n_values: Optional[Sequence[int]] = None,
    mode: str = "power",
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Per-site power (full model) or target strength (Hamiltonian only) versus N

    Points above the configured caps are reported as skipped.
    """
    if mode not in ("power", "strength"):
        raise ValueError(f"Unknown scaling mode: {mode}")
    n_values = list(n_values or config.axes.n_values)
    logger.info(f"Scaling study ({mode}) over N={n_values}")

    if mode == "power":
        def evaluate(n):
            if n > settings.POWER_MAX_SITES:
                raise DimensionError(f"Power study limited to {settings.POWER_MAX_SITES} sites", details={"n_sites": n})
            return _power_metrics(config.with_updates({"n_sites": n}))
        columns = POWER_COLUMNS + ["status", "error"]
    else:
        def evaluate(n):
            return strength_row(config, n)
        columns = STRENGTH_COLUMNS

    outcomes = run_pool(evaluate, n_values, workers or config.workers)
    rows = [outcome_row(o, {"n_sites": n}, columns) for o, n in zip(outcomes, n_values)]
    return SweepResult(
        study=f"scaling_{mode}",
        axes={"n_sites": n_values},
        rows=rows,
        statistics={"skipped": sum(r["status"] == "skipped" for r in rows), "failed": sum(r["status"] == "failed" for r in rows)},
        seed=config.seed,
    )

