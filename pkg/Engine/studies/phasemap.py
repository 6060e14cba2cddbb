"""
Phase maps and angle scans
Net power over (tau_L, r_nn) for several phonon temperatures, optionally
re-optimising the dipole angles at every point.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import EngineError
from models import SweepResult
from photocell import solve_config
from schemas import RunConfig
from studies.pool import run_pool
from studies.sweeps import outcome_row

logger = logging.getLogger(__name__)

PHASEMAP_COLUMNS = ["t_vib", "tau_l", "r_nn", "theta_eq", "theta_zen", "p_net", "positive", "status", "error"]
ANGLE_COLUMNS = ["theta_eq", "theta_zen", "p_net", "status", "error"]


def angle_grid(points: int) -> Tuple[np.ndarray, np.ndarray]:
    """theta_eq over [0, 2 pi) and theta_zen over [0, pi/2]."""
    return (
        np.linspace(0.0, 2.0 * math.pi, points, endpoint=False),
        np.linspace(0.0, 0.5 * math.pi, points),
    )


def net_power(config: RunConfig, theta_eq: float, theta_zen: float) -> float:
    updated = config.with_updates({"ring.theta_eq": float(theta_eq), "ring.theta_zen": float(theta_zen)})
    return solve_config(updated).p_net


def _safe_net_power(config: RunConfig, theta_eq: float, theta_zen: float) -> float:
    try:
        return net_power(config, theta_eq, theta_zen)
    except EngineError as exc:
        logger.debug(f"Angles ({theta_eq:.3f}, {theta_zen:.3f}) failed: {exc.code}")
        return -math.inf


def optimize_angles(config: RunConfig, points: int) -> Tuple[float, float, float]:
    """
    Grid search over both dipole angles followed by one finer local pass

    Returns:
        (theta_eq, theta_zen, p_net) of the best point
    """
    eq_axis, zen_axis = angle_grid(points)
    best = (math.nan, math.nan, -math.inf)
    for eq in eq_axis:
        for zen in zen_axis:
            p = _safe_net_power(config, eq, zen)
            if p > best[2]:
                best = (float(eq), float(zen), p)
    if best[2] == -math.inf:
        raise EngineError("No dipole orientation on the angle grid was solvable")

    step_eq, step_zen = 0.5 * (eq_axis[1] - eq_axis[0]), 0.5 * (zen_axis[1] - zen_axis[0])
    centre = best
    for d_eq in (-step_eq, 0.0, step_eq):
        for d_zen in (-step_zen, 0.0, step_zen):
            if d_eq == 0.0 and d_zen == 0.0:
                continue
            eq = (centre[0] + d_eq) % (2.0 * math.pi)
            zen = min(max(centre[1] + d_zen, 0.0), 0.5 * math.pi)
            p = _safe_net_power(config, eq, zen)
            if p > best[2]:
                best = (float(eq), float(zen), p)
    return best


def phase_map(
    config: RunConfig,
    tau_axis: Optional[Sequence[float]] = None,
    rnn_axis: Optional[Sequence[float]] = None,
    temperatures: Optional[Sequence[float]] = None,
    optimize: Optional[bool] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Net power and positive-power mask over (T_vib, tau_L, r_nn)

    The statistics report the positive-point count per temperature and
    whether the positive regions shrink monotonically as temperature rises.
    """
    tau_axis = list(tau_axis or config.axes.tau_l)
    rnn_axis = list(rnn_axis or config.axes.r_nn)
    temperatures = list(temperatures or config.axes.temperatures)
    optimize = config.study.optimize_angles if optimize is None else optimize
    points = [(t, tau, r) for t in temperatures for tau in tau_axis for r in rnn_axis]
    logger.info(f"Phase map: {len(points)} points, angle optimisation {'on' if optimize else 'off'}")

    def evaluate(point):
        t_vib, tau_l, r_nn = point
        local = config.with_updates({
            "environment.phonon.temperature": t_vib,
            "ring.tau_l": tau_l,
            "ring.r_nn": r_nn,
        })
        if optimize:
            eq, zen, p = optimize_angles(local, config.axes.angle_points)
        else:
            eq, zen = local.angles()
            p = net_power(local, eq, zen)
        return {"theta_eq": eq, "theta_zen": zen, "p_net": p, "positive": bool(p > 0)}

    outcomes = run_pool(evaluate, points, workers or config.workers)
    rows = [
        outcome_row(o, {"t_vib": t, "tau_l": tau, "r_nn": r}, PHASEMAP_COLUMNS)
        for o, (t, tau, r) in zip(outcomes, points)
    ]
    return SweepResult(
        study="phasemap",
        axes={"t_vib": temperatures, "tau_l": tau_axis, "r_nn": rnn_axis},
        rows=rows,
        statistics=mask_statistics(rows, temperatures),
        seed=config.seed,
    )


def mask_statistics(rows: List[Dict], temperatures: Sequence[float]) -> Dict:
    masks = {
        t: {(r["tau_l"], r["r_nn"]) for r in rows if r["t_vib"] == t and r["status"] == "ok" and r["positive"]}
        for t in temperatures
    }
    ordered = sorted(temperatures)
    nested = all(masks[hot] <= masks[cold] for cold, hot in zip(ordered, ordered[1:]))
    return {
        "positive_counts": {str(t): len(masks[t]) for t in temperatures},
        "masks_nested": nested,
        "failed": sum(r["status"] != "ok" for r in rows),
    }


def angle_scan(config: RunConfig, points: Optional[int] = None, workers: Optional[int] = None) -> SweepResult:
    """Net power over the full (theta_eq, theta_zen) grid at fixed tau_L and r_nn."""
    eq_axis, zen_axis = angle_grid(points or config.axes.angle_points)
    grid = [(float(eq), float(zen)) for eq in eq_axis for zen in zen_axis]
    outcomes = run_pool(lambda p: {"p_net": net_power(config, *p)}, grid, workers or config.workers)
    rows = [outcome_row(o, {"theta_eq": eq, "theta_zen": zen}, ANGLE_COLUMNS) for o, (eq, zen) in zip(outcomes, grid)]
    return SweepResult(
        study="angles",
        axes={"theta_eq": [float(x) for x in eq_axis], "theta_zen": [float(x) for x in zen_axis]},
        rows=rows,
        statistics={"failed": sum(not o.ok for o in outcomes)},
        seed=config.seed,
    )
