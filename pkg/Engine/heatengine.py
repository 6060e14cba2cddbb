"""
Heat-engine accounting
Turns steady states into trap current and voltage, optimises the load
(trap decay rate gamma_t), and prices the reinitialisation pumping.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from config import settings
from constants import current_amperes, energy_ev_to_volts, power_watts, thermal_energy
from errors import ConfigurationError, EngineError, SolverError, VoltageUndefinedError
from models import Eigenbasis, SteadyState

if TYPE_CHECKING:
    from photocell import PhotocellModel
    from schemas import PowerReport

logger = logging.getLogger(__name__)

UNIMODAL_FLOOR = 1e-9


class TrapPopulations(NamedTuple):
    alpha: float   # trap excited
    beta: float    # trap ground


@dataclass(frozen=True)
class LoadPoint:
    gamma_t: float
    state: Optional[SteadyState]
    populations: Optional[TrapPopulations]
    current: float
    voltage: Optional[float]
    power: float
    error: Optional[str] = None    # error code of a failed solve

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def failed(cls, gamma_t: float, exc: EngineError) -> "LoadPoint":
        return cls(gamma_t, None, None, math.nan, None, -math.inf, error=exc.code)


@dataclass(frozen=True)
class LoadOptimum:
    best: LoadPoint
    non_unimodal: bool
    evaluations: int
    failed_points: int = 0
    at_boundary: bool = False    # best grid point is an end of the scan range

    @property
    def gamma_t_star(self) -> float:
        return self.best.gamma_t

    @property
    def p_out(self) -> float:
        return self.best.power


# ============================================
# Populations
# ============================================

def site_basis_diagonal(rho: np.ndarray, basis: Eigenbasis) -> np.ndarray:
    """Computational-basis populations of an eigenbasis density matrix."""
    return np.real(np.einsum("ia,ab,ib->i", basis.states, rho, basis.states.conj()))


def _bit(n_qubits: int, qubit: int) -> np.ndarray:
    return (np.arange(2 ** n_qubits) >> (n_qubits - 1 - qubit)) & 1


def trap_populations(rho: np.ndarray, basis: Eigenbasis) -> TrapPopulations:
    """
    Reduced trap populations of a ring + trap state

    Raises:
        ConfigurationError: If the basis has no trap
    """
    if not basis.has_trap:
        raise ConfigurationError("Trap populations need a model with a trap")
    p = site_basis_diagonal(rho, basis)
    excited = _bit(basis.n_qubits, basis.n_qubits - 1) == 1
    return TrapPopulations(alpha=float(p[excited].sum()), beta=float(p[~excited].sum()))


def site_excitations(rho: np.ndarray, basis: Eigenbasis) -> np.ndarray:
    """Excited-state population of every ring site."""
    p = site_basis_diagonal(rho, basis)
    return np.array([p[_bit(basis.n_qubits, i) == 1].sum() for i in range(basis.n_sites)])


def ring_density(rho: np.ndarray, basis: Eigenbasis) -> np.ndarray:
    """Ring density matrix in the site basis, trap traced out."""
    rho_site = basis.to_site_basis(rho)
    if not basis.has_trap:
        return rho_site
    ring_dim = 2 ** basis.n_sites
    return np.einsum("iaja->ij", rho_site.reshape(ring_dim, 2, ring_dim, 2))


def ring_state_populations(rho: np.ndarray, basis: Eigenbasis, ring: Eigenbasis, indices: Sequence[int]) -> np.ndarray:
    """Populations of selected ring eigenstates."""
    reduced = ring_density(rho, basis)
    vectors = ring.states[:, list(indices)]
    return np.real(np.einsum("ia,ij,ja->a", vectors.conj(), reduced, vectors))


# ============================================
# Current & Voltage
# ============================================

def current(populations: TrapPopulations, gamma_t: float) -> float:
    """
    Trap current I = e (gamma_t / hbar) <rho_alpha>

    Args:
        populations: Steady-state trap populations
        gamma_t: Trap decay rate (eV, > 0)

    Returns:
        Current in amperes
    """
    if gamma_t <= 0:
        raise ValueError("gamma_t must be positive")
    return current_amperes(gamma_t, populations.alpha)


def voltage(populations: TrapPopulations, omega_t: float, t_vib: float) -> float:
    """
    Trap voltage eV = omega_t + k_B T_vib ln(<rho_alpha> / <rho_beta>)

    Raises:
        VoltageUndefinedError: If either trap population is zero
    """
    if populations.alpha <= 0 or populations.beta <= 0:
        raise VoltageUndefinedError(
            "voltage undefined for an empty trap level",
            details={"rho_alpha": populations.alpha, "rho_beta": populations.beta},
        )
    return energy_ev_to_volts(omega_t + thermal_energy(t_vib) * math.log(populations.alpha / populations.beta))


# ============================================
# Load Optimisation
# ============================================

def power_at(model: "PhotocellModel", gamma_t: float) -> LoadPoint:
    """Output power I V at one load; an undefined voltage counts as zero power."""
    state = model.solve(gamma_t)
    pops = trap_populations(state.rho, model.basis)
    i = current(pops, gamma_t)
    try:
        v = voltage(pops, model.omega_t, model.t_vib)
    except VoltageUndefinedError:
        v = None
    power = power_watts(i, v) if v is not None else 0.0
    return LoadPoint(gamma_t=gamma_t, state=state, populations=pops, current=i, voltage=v, power=power)


def is_unimodal(powers: np.ndarray) -> bool:
    """Rises then falls, ignoring points negligible against the peak."""
    powers = np.asarray(powers, dtype=float)
    peak = np.abs(powers).max() if powers.size else 0.0
    if peak == 0.0:
        return True
    significant = powers[np.abs(powers) >= UNIMODAL_FLOOR * peak]
    steps = np.sign(np.diff(significant))
    steps = steps[steps != 0]
    return not np.any((steps[:-1] < 0) & (steps[1:] > 0))


def optimize_load(
    model: "PhotocellModel",
    gamma_t_range: Optional[Tuple[float, float]] = None,
    points: Optional[int] = None,
    rtol: Optional[float] = None,
) -> LoadOptimum:
    """
    Maximise output power over the trap decay rate

    A logarithmic grid scan locates the peak, then bounded Brent search
    (golden-section steps with parabolic interpolation) in log(gamma_t)
    narrows the bracket around it to the relative tolerance.
    A profile with more than one peak returns the best grid point with the
    non_unimodal flag set. Loads whose steady state cannot be solved are
    recorded as failed points and skipped; a peak on either end of the scan
    range sets at_boundary.

    Args:
        model: Solvable photocell model
        gamma_t_range: (min, max) scan bounds in eV
        points: Grid size
        rtol: Relative bracket width at which refinement stops

    Returns:
        LoadOptimum holding the best load point

    Raises:
        SolverError: If no load on the grid could be solved
    """
    lo, hi = gamma_t_range or (settings.LOAD_SCAN_MIN, settings.LOAD_SCAN_MAX)
    points = points or settings.LOAD_SCAN_POINTS
    rtol = rtol or settings.LOAD_REFINE_RTOL

    cache: Dict[float, LoadPoint] = {}

    def evaluate(log_gamma: float) -> LoadPoint:
        if log_gamma not in cache:
            gamma_t = math.exp(log_gamma)
            try:
                cache[log_gamma] = power_at(model, gamma_t)
            except EngineError as exc:
                logger.warning(f"Load gamma_t={gamma_t:.3e} eV failed ({exc.code}): {exc.message}")
                cache[log_gamma] = LoadPoint.failed(gamma_t, exc)
        return cache[log_gamma]

    grid = np.linspace(math.log(lo), math.log(hi), points)
    scan = [evaluate(float(u)) for u in grid]
    solved = np.array([p.ok for p in scan])
    if not solved.any():
        raise SolverError(
            "No load on the scan grid produced a valid steady state",
            details={"gamma_t_range": [lo, hi], "points": points, "errors": sorted({p.error for p in scan})},
        )
    failed = int((~solved).sum())
    powers = np.array([p.power for p in scan])
    best_idx = int(np.argmax(powers))
    at_boundary = best_idx in (0, points - 1)
    if at_boundary:
        logger.warning(f"Load optimum sits on the scan boundary gamma_t={scan[best_idx].gamma_t:.3e} eV")

    if not is_unimodal(powers[solved]):
        logger.warning(f"Load profile is not unimodal; using grid maximum at gamma_t={scan[best_idx].gamma_t:.3e} eV")
        return LoadOptimum(
            best=scan[best_idx], non_unimodal=True, evaluations=len(cache),
            failed_points=failed, at_boundary=at_boundary,
        )

    # failed loads inside the bracket score as the worst solved grid point
    penalty = -float(powers[solved].min())

    def objective(u: float) -> float:
        point = evaluate(float(u))
        return -point.power if point.ok else penalty

    a = float(grid[max(best_idx - 1, 0)])
    b = float(grid[min(best_idx + 1, points - 1)])
    minimize_scalar(objective, bounds=(a, b), method="bounded", options={"xatol": math.log1p(rtol)})

    best = max((p for p in cache.values() if p.ok), key=lambda p: p.power)
    failed = sum(not p.ok for p in cache.values())
    logger.debug(f"Load optimum gamma_t={best.gamma_t:.4e} eV, P={best.power:.4e} W ({len(cache)} solves)")
    return LoadOptimum(
        best=best, non_unimodal=False, evaluations=len(cache),
        failed_points=failed, at_boundary=at_boundary,
    )


# ============================================
# Input Power
# ============================================

def input_power_ladder(
    model: "PhotocellModel", rho: np.ndarray, gamma_r: float, include_log: bool = False
) -> Tuple[float, List[float]]:
    """
    Input power of ladder-climbing reinitialisation

    Each pumped rung n contributes I_n V_n with I_n = e (gamma_r / hbar) p_n
    and V_n the rung-to-BTTS energy gap. With include_log the voltage gains
    k_B T ln(p_n / p_BTTS).

    Returns:
        (input power in W, per-rung currents in A)
    """
    target = model.target
    rungs = [model.ring.ladder_index(n) for n in range(target.rung)]
    if not rungs:
        return 0.0, []
    pops = ring_state_populations(rho, model.basis, model.ring, rungs + [target.btts])
    p_btts = pops[-1]
    total, currents = 0.0, []
    for rung_index, p_n in zip(rungs, pops[:-1]):
        i_n = current_amperes(gamma_r, max(p_n, 0.0))
        gap = float(model.ring.energies[target.btts] - model.ring.energies[rung_index])
        if include_log and p_n > 0 and p_btts > 0:
            gap += thermal_energy(model.t_vib) * math.log(p_n / p_btts)
        currents.append(i_n)
        total += power_watts(i_n, energy_ev_to_volts(gap))
    return total, currents


def input_power_site(model: "PhotocellModel", rho: np.ndarray, gamma_r: float) -> Tuple[float, List[float]]:
    """
    Input power of site-based reinitialisation

    Site i contributes I_i V_i with I_i = e (gamma_r / hbar) <g_i> and
    eV_i = omega_A,i + k_B T ln(<g_i> / <e_i>).

    Raises:
        VoltageUndefinedError: If a site with ground population has no excited population
    """
    excited = site_excitations(rho, model.basis)
    kt = thermal_energy(model.t_vib)
    total, currents = 0.0, []
    for i, e_i in enumerate(excited):
        g_i = 1.0 - e_i
        i_i = current_amperes(gamma_r, max(g_i, 0.0))
        currents.append(i_i)
        if g_i <= 0:
            continue
        if e_i <= 0:
            raise VoltageUndefinedError("site voltage undefined for an empty excited level", details={"site": i})
        v_i = energy_ev_to_volts(float(model.spec.omega_a[i]) + kt * math.log(g_i / e_i))
        total += power_watts(i_i, v_i)
    return total, currents


def optimize_reinit(
    build: Callable[[float], "PhotocellModel"], gamma_rs: Sequence[float]
) -> Tuple[float, "PowerReport"]:
    """
    Pick the reinitialisation rate with the highest net power

    Every candidate is load-optimised; failing candidates are logged and skipped.

    Raises:
        EngineError: If every candidate fails
    """
    best: Optional[Tuple[float, "PowerReport"]] = None
    for gamma_r in gamma_rs:
        try:
            report = build(gamma_r).power_report()
        except EngineError as exc:
            logger.warning(f"gamma_r={gamma_r:.3e} eV failed: {exc.message}")
            continue
        if best is None or report.p_net > best[1].p_net:
            best = (gamma_r, report)
    if best is None:
        raise EngineError("No reinitialisation rate produced a solvable model", details={"gamma_r": list(gamma_rs)})
    logger.info(f"Optimal gamma_r={best[0]:.3e} eV (P_net={best[1].p_net:.4e} W)")
    return best
