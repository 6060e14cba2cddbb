"""
Photocell model
Turns a validated run configuration (or an explicit, possibly disordered
RingSpec) into a solvable ring + trap model: eigenbases, baths, dissipator
blocks and the load-dependent Liouvillian L(gamma_t) = L0 + gamma_t L_t.
"""

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from config import settings
from dissipators import (
    extraction_incoherent,
    optical_tensor,
    reinit_ladder,
    reinit_site,
    trap_decay,
    vibrational_tensor,
)
from environment import bandgap_cutoff, calibrate_kappa_vib, optical_kappa
from errors import CalibrationError, DimensionError
from geometry import build_ring_spec, coupling, uncoupled
from hamiltonian import (
    build_hamiltonian,
    diagonalize,
    flag_ladder,
    infer_convention,
    product_basis,
    target_transition,
    transition_table,
)
from heatengine import input_power_ladder, input_power_site, optimize_load, optimize_reinit, power_at
from liouvillian import assemble, steady_state
from models import (
    BandGap,
    CouplingMatrix,
    Eigenbasis,
    Liouvillian,
    OpticalBath,
    PhononBath,
    RingSpec,
    SteadyState,
    TargetTransition,
    Tolerances,
    TransitionTable,
    TrapSpec,
)
from schemas import PowerReport, RunConfig

logger = logging.getLogger(__name__)


# ============================================
# Ring Analysis (Hamiltonian only)
# ============================================

@dataclass(frozen=True)
class RingAnalysis:
    spec: RingSpec
    couplings: CouplingMatrix
    basis: Eigenbasis
    target: TargetTransition


def ring_spec_from_config(config: RunConfig, n_sites: Optional[int] = None) -> RingSpec:
    theta_eq, theta_zen = config.angles()
    return build_ring_spec(
        n_sites=n_sites or config.n_sites,
        omega_a=config.ring.omega_a,
        tau_l=config.ring.tau_l,
        r_nn=config.ring.r_nn,
        theta_eq=theta_eq,
        theta_zen=theta_zen,
    )


def analyse_ring(spec: RingSpec, convention: Optional[str], coupled: bool = True) -> RingAnalysis:
    """
    Diagonalise the bare ring and locate its ladder and target transition

    A convention of None is derived from the dipole geometry.
    """
    ring_only = replace(spec, trap=None)
    couplings = coupling(ring_only) if coupled else uncoupled(ring_only)
    convention = convention or infer_convention(ring_only, couplings)
    basis = flag_ladder(diagonalize(build_hamiltonian(ring_only, couplings)), convention)
    return RingAnalysis(spec=ring_only, couplings=couplings, basis=basis, target=target_transition(basis))


def ring_transitions(analysis: RingAnalysis) -> TransitionTable:
    return transition_table(analysis.basis, analysis.spec)


# ============================================
# Photocell Model
# ============================================

class PhotocellModel:
    """
    Ring + heat-engine trap under optical and phonon baths

    The Liouvillian is split as L0 + gamma_t L_t so that load scans reuse
    one assembly.
    """

    def __init__(self, config: RunConfig, spec: Optional[RingSpec] = None):
        self.config = config
        self.spec = replace(spec, trap=None) if spec is not None else ring_spec_from_config(config)
        if self.spec.n_sites > settings.POWER_MAX_SITES:
            raise DimensionError(
                f"Power model limited to {settings.POWER_MAX_SITES} sites, got {self.spec.n_sites}",
                details={"n_sites": self.spec.n_sites, "cap": settings.POWER_MAX_SITES},
            )
        self.tolerances = Tolerances.from_settings(settings, config.tolerances.model_dump())
        self.t_vib = config.environment.phonon.temperature
        self.gamma_r = config.reinit.gamma_r
        self.scheme = config.reinit.scheme

        started = time.perf_counter()
        self.analysis = analyse_ring(self.spec, config.ladder_convention(), config.coupled())
        self.ring = self.analysis.basis
        self.target = self.analysis.target
        self.omega_t = self.target.omega_good

        self.optical = self._optical_bath()
        self.phonon = self._phonon_bath()
        self.trap = TrapSpec(
            mode=config.trap.mode,
            gamma_x=config.trap.gamma_x,
            c_x=config.trap.c_x,
            omega_t=self.omega_t,
        )
        self.basis = self._full_basis()
        self.base, self.load = self._assemble()
        logger.debug(
            f"Built N={self.spec.n_sites} model (d={self.basis.dim}) in {time.perf_counter() - started:.2f}s"
        )

    # --- construction ---

    def _optical_bath(self) -> OpticalBath:
        kappa = optical_kappa(float(np.mean(self.spec.omega_a)), float(np.mean(self.spec.tau_l)))
        suppression = self.config.suppression()
        bandgap = None
        if suppression > 0 and self.target.omega_bad is not None:
            side = self.config.bandgap_side(self.ring.convention)
            cutoff = bandgap_cutoff(self.target.omega_good, self.target.omega_bad, side)
            bandgap = BandGap(cutoff=cutoff, suppression=suppression, side=side)
        return OpticalBath(temperature=self.config.environment.optical.temperature, kappa_opt=kappa, bandgap=bandgap)

    def _phonon_bath(self) -> PhononBath:
        section = self.config.environment.phonon
        multiplier = self.config.phonon_multiplier()
        if section.model == "superohmic":
            lam, omega_crit = section.superohmic_parameters()
            if multiplier == 0:
                lam = 0.0
            return PhononBath(model="superohmic", temperature=section.temperature, reorganisation=lam, omega_crit=omega_crit)

        if section.kappa_vib is not None:
            kappa = section.kappa_vib
        elif multiplier == 0:
            kappa = 0.0
        else:
            try:
                kappa = calibrate_kappa_vib(self.ring, self.spec.tau_l, multiplier)
            except CalibrationError:
                logger.info("No intra-manifold structure; phonon bath disabled")
                kappa = 0.0
        return PhononBath(model="ohmic", temperature=section.temperature, kappa_vib=kappa)

    def _full_basis(self) -> Eigenbasis:
        if self.trap.mode == "incoherent":
            return product_basis(self.ring, self.omega_t)
        with_trap = replace(self.spec, trap=self.trap)
        return diagonalize(build_hamiltonian(with_trap, self.analysis.couplings), has_trap=True)

    def _assemble(self):
        blocks = [optical_tensor(self.basis, self.spec, self.optical)]
        blocks += vibrational_tensor(self.basis, self.spec, self.phonon)
        coherent = self.trap.mode == "coherent"
        if not coherent:
            blocks.append(extraction_incoherent(self.basis, self.ring, self.target, self.trap.gamma_x))
        if self.scheme == "ladder":
            blocks.append(reinit_ladder(self.basis, self.ring, self.target, self.gamma_r, coherent=coherent))
        else:
            blocks.append(reinit_site(self.basis, self.spec.n_sites, self.gamma_r))
        base = assemble(np.diag(self.basis.energies), blocks)
        load = trap_decay(self.basis, 1.0).superop
        return base, load

    # --- solving ---

    def liouvillian(self, gamma_t: float) -> Liouvillian:
        return Liouvillian(superop=(self.base.superop + gamma_t * self.load).tocsr(), dim=self.base.dim, blocks=self.base.blocks)

    def solve(self, gamma_t: float) -> SteadyState:
        return steady_state(self.liouvillian(gamma_t), tolerances=self.tolerances)

    def power_report(self, gamma_t: Optional[float] = None) -> PowerReport:
        """Load-optimised power accounting (or at a fixed gamma_t when given)."""
        if gamma_t is None:
            optimum = optimize_load(self)
            point, non_unimodal = optimum.best, optimum.non_unimodal
            failed_points, at_boundary = optimum.failed_points, optimum.at_boundary
        else:
            point, non_unimodal = power_at(self, gamma_t), False
            failed_points, at_boundary = 0, False

        rho = point.state.rho
        rung_currents, site_currents = [], []
        if self.scheme == "ladder":
            p_in, rung_currents = input_power_ladder(self, rho, self.gamma_r, self.config.reinit.include_log)
        else:
            p_in, site_currents = input_power_site(self, rho, self.gamma_r)

        diagnostics = point.state.diagnostics
        return PowerReport(
            n_sites=self.spec.n_sites,
            gamma_t_star=point.gamma_t,
            current=point.current,
            voltage=point.voltage if point.voltage is not None else math.nan,
            p_out=point.power,
            p_in=p_in,
            p_net=point.power - p_in,
            rho_alpha=min(max(point.populations.alpha, 0.0), 1.0),
            rho_beta=min(max(point.populations.beta, 0.0), 1.0),
            gamma_r=self.gamma_r,
            scheme=self.scheme,
            rung_currents=rung_currents,
            site_currents=site_currents,
            non_unimodal=non_unimodal,
            load_at_boundary=at_boundary,
            failed_loads=failed_points,
            kernel_dim=point.state.kernel_dim,
            residual=point.state.residual,
            trace_dev=diagnostics.trace_dev,
            hermiticity_dev=diagnostics.hermiticity_dev,
            min_eigenvalue=diagnostics.min_eigenvalue,
        )


def build_model(config: RunConfig, spec: Optional[RingSpec] = None) -> PhotocellModel:
    return PhotocellModel(config, spec)


def solve_config(config: RunConfig, spec: Optional[RingSpec] = None) -> PowerReport:
    """Power report for one configuration, optimising gamma_r first when requested."""
    if config.reinit.optimize:
        _, report = optimize_reinit(
            lambda gamma_r: PhotocellModel(config.with_updates({"reinit.gamma_r": gamma_r}), spec),
            config.reinit.gamma_r_scan,
        )
        return report
    return PhotocellModel(config, spec).power_report()
