# Pydantic schemas for everything that crosses the disk boundary:
#
# - **Run configuration** (`RunConfig` and its sections), parsed from JSON files
# - **Result records** (`PowerReport`, study row layouts)
# - **Run manifest** (`RunManifest`)
#
# Defaults reproduce the reference parameter set (omega_A = 1.8 eV,
# tau_L = 2.5 ns, r_nn = 1 nm, theta_eq = pi/2, theta_zen = pi/4, S = 0.99,
# gamma_x = gamma_r = 1e-2 eV, T_opt = 5800 K, T_vib = 300 K).

import math
from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# ============================================
# Presets
# ============================================

# configuration -> (theta_eq, theta_zen, ladder convention, band-gap side, default suppression)
CONFIGURATION_PRESETS: Dict[str, Tuple[float, float, str, str, float]] = {
    "gs": (math.pi / 2, math.pi / 4, "guide_slide", "below", 0.99),
    "parallel": (math.pi / 2, math.pi / 2, "parallel", "above", 0.999),
    "dicke": (math.pi / 2, math.pi / 2, "parallel", "above", 0.999),
}

# ladder convention -> side of the cutoff the band gap suppresses
BANDGAP_SIDES: Dict[str, str] = {"guide_slide": "below", "parallel": "above"}

PHONON_REGIMES: Dict[str, float] = {"fast": 1e3, "match": 1.0, "slow": 1e-3, "off": 0.0}

# name -> (reorganisation energy, cutoff frequency), both eV
SUPEROHMIC_PRESETS: Dict[str, Tuple[float, float]] = {
    "molecular_a": (5e-3, 90e-3),
    "molecular_b": (20e-3, 25e-3),
}


class StrictModel(BaseModel):
    """Base for config sections: unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid")


# ============================================
# Run Configuration Sections
# ============================================

class RingSection(StrictModel):
    """Dipole ring parameters (per-site values are uniform before disorder)"""
    omega_a: float = Field(1.8, gt=0, description="2LS splitting (eV)")
    tau_l: float = Field(2.5e-9, gt=0, description="Natural lifetime (s)")
    r_nn: float = Field(1e-9, gt=0, description="Nearest-neighbour separation (m)")
    theta_eq: Optional[float] = Field(None, description="Equatorial angle (rad); preset value when omitted")
    theta_zen: Optional[float] = Field(None, ge=0, le=math.pi / 2, description="Zenith angle (rad); preset value when omitted")
    coupled: bool = Field(True, description="Include dipole-dipole couplings")


class TrapSection(StrictModel):
    """Heat-engine trap"""
    mode: Literal["incoherent", "coherent"] = "incoherent"
    gamma_x: float = Field(1e-2, ge=0, description="Incoherent extraction rate (eV)")
    c_x: float = Field(1e-4, ge=0, description="Coherent ring-trap coupling (eV)")


class ReinitSection(StrictModel):
    """Reinitialisation pumping"""
    scheme: Literal["ladder", "site"] = "ladder"
    gamma_r: float = Field(1e-2, ge=0, description="Reinitialisation rate (eV)")
    optimize: bool = Field(False, description="Scan gamma_r for maximum net power")
    gamma_r_scan: List[float] = Field(
        default_factory=lambda: [10.0 ** k for k in range(-10, -1)],
        description="Candidate gamma_r values for the optimisation scan (eV)",
    )
    include_log: bool = Field(False, description="Ladder input power with the logarithmic voltage term")


class OpticalSection(StrictModel):
    temperature: float = Field(5800.0, ge=0, description="Optical bath temperature (K)")
    suppression: Optional[float] = Field(None, ge=0, le=1, description="Band-gap suppression S; preset value when omitted")
    bandgap: bool = Field(True, description="Apply the band-gap step")


class PhononSection(StrictModel):
    model: Literal["ohmic", "superohmic"] = "ohmic"
    temperature: float = Field(300.0, ge=0, description="Vibrational bath temperature (K)")
    regime: Literal["fast", "match", "slow", "off"] = "fast"
    kappa_vib: Optional[float] = Field(None, ge=0, description="Explicit Ohmic strength; overrides calibration")
    preset: Optional[Literal["molecular_a", "molecular_b"]] = None
    reorganisation: Optional[float] = Field(None, ge=0, description="Super-Ohmic reorganisation energy (eV)")
    omega_crit: Optional[float] = Field(None, gt=0, description="Super-Ohmic cutoff frequency (eV)")

    @model_validator(mode="after")
    def check_superohmic(self):
        if self.model == "superohmic" and self.preset is None:
            if self.reorganisation is None or self.omega_crit is None:
                raise ValueError("superohmic model needs a preset or both reorganisation and omega_crit")
        return self

    def superohmic_parameters(self) -> Tuple[float, float]:
        if self.preset is not None:
            lam, wc = SUPEROHMIC_PRESETS[self.preset]
        else:
            lam, wc = 0.0, 1.0
        if self.reorganisation is not None:
            lam = self.reorganisation
        if self.omega_crit is not None:
            wc = self.omega_crit
        return lam, wc


class EnvironmentSection(StrictModel):
    optical: OpticalSection = Field(default_factory=OpticalSection)
    phonon: PhononSection = Field(default_factory=PhononSection)


class DisorderSection(StrictModel):
    fraction: float = Field(0.0, ge=0, lt=1, description="Relative standard deviation")
    targets: List[Literal["omega_a", "tau_l", "positions", "angles"]] = Field(
        default_factory=lambda: ["omega_a", "tau_l", "positions", "angles"]
    )
    trials: int = Field(1, ge=1)


class AxesSection(StrictModel):
    """Study axes; each study reads only the axes it needs"""
    suppression: List[float] = Field(default_factory=lambda: [0.5, 0.9, 0.99])
    gamma_r: List[float] = Field(default_factory=lambda: [1e-8, 1e-6, 1e-4, 1e-2])
    n_values: List[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    tau_l: List[float] = Field(default_factory=lambda: [1e-9, 2.5e-9, 1e-8])
    r_nn: List[float] = Field(default_factory=lambda: [0.5e-9, 1e-9, 2e-9])
    temperatures: List[float] = Field(default_factory=lambda: [4.0, 77.0, 300.0])
    angle_points: int = Field(16, ge=2, description="Grid points per angle in angle searches")
    bins: int = Field(40, ge=1, description="Histogram bins")


class StudySection(StrictModel):
    kind: Literal["power", "strength", "ladder"] = "power"
    optimize_angles: bool = False
    near_threshold: Optional[float] = Field(
        None, gt=0, description="Ladder-structure proximity threshold (eV); k_B T_vib when omitted"
    )


class ToleranceSection(StrictModel):
    residual: Optional[float] = Field(None, gt=0)
    trace: Optional[float] = Field(None, gt=0)
    hermiticity: Optional[float] = Field(None, gt=0)
    positivity: Optional[float] = Field(None, gt=0)
    kernel: Optional[float] = Field(None, gt=0)


class RunConfig(StrictModel):
    """Complete, validated description of one run"""
    n_sites: int = Field(..., ge=1, description="Number of dipoles in the ring")
    configuration: Literal["gs", "parallel", "dicke", "custom"] = "gs"
    ladder: Optional[Literal["guide_slide", "parallel"]] = Field(
        None, description="Ladder convention; preset value when omitted"
    )
    ring: RingSection = Field(default_factory=RingSection)
    trap: TrapSection = Field(default_factory=TrapSection)
    reinit: ReinitSection = Field(default_factory=ReinitSection)
    environment: EnvironmentSection = Field(default_factory=EnvironmentSection)
    disorder: DisorderSection = Field(default_factory=DisorderSection)
    study: StudySection = Field(default_factory=StudySection)
    axes: AxesSection = Field(default_factory=AxesSection)
    tolerances: ToleranceSection = Field(default_factory=ToleranceSection)
    output_dir: Optional[str] = None
    seed: int = Field(0, ge=0, lt=2 ** 64)
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_custom(self):
        if self.configuration == "custom":
            if self.ring.theta_eq is None or self.ring.theta_zen is None:
                raise ValueError("custom configuration needs ring.theta_eq and ring.theta_zen")
        return self

    # --- preset resolution ---

    def _preset(self) -> Tuple[float, float, str, str, float]:
        return CONFIGURATION_PRESETS.get(self.configuration, CONFIGURATION_PRESETS["gs"])

    def angles(self) -> Tuple[float, float]:
        eq, zen = self._preset()[:2]
        return (
            self.ring.theta_eq if self.ring.theta_eq is not None else eq,
            self.ring.theta_zen if self.ring.theta_zen is not None else zen,
        )

    def angles_follow_preset(self) -> bool:
        if self.configuration == "custom":
            return False
        return self.angles() == self._preset()[:2]

    def ladder_convention(self) -> Optional[str]:
        """Explicit or preset convention; None when the angles leave the preset and it must be derived."""
        if self.ladder is not None:
            return self.ladder
        return self._preset()[2] if self.angles_follow_preset() else None

    def bandgap_side(self, convention: Optional[str] = None) -> str:
        return BANDGAP_SIDES[convention or self.ladder_convention() or self._preset()[2]]

    def suppression(self) -> float:
        if not self.environment.optical.bandgap:
            return 0.0
        s = self.environment.optical.suppression
        return s if s is not None else self._preset()[4]

    def coupled(self) -> bool:
        return self.ring.coupled and self.configuration != "dicke"

    def phonon_multiplier(self) -> float:
        return PHONON_REGIMES[self.environment.phonon.regime]

    def with_updates(self, updates: Dict[str, Any]) -> "RunConfig":
        """Re-validated copy with dotted keys replaced, e.g. {"ring.tau_l": 1e-9}"""
        data = self.model_dump()
        for dotted, value in updates.items():
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node[key]
            if leaf not in node:
                raise KeyError(f"Unknown config field: {dotted}")
            node[leaf] = value
        return RunConfig.model_validate(data)


# ============================================
# Result Schemas
# ============================================

class PowerReport(BaseModel):
    """Steady-state power accounting at the optimised load"""
    n_sites: int
    gamma_t_star: float = Field(..., description="Optimal trap decay rate (eV)")
    current: float = Field(..., description="Trap current (A)")
    voltage: float = Field(..., description="Trap voltage (V)")
    p_out: float = Field(..., description="Output power (W)")
    p_in: float = Field(..., description="Reinitialisation input power (W)")
    p_net: float = Field(..., description="p_out - p_in (W)")
    rho_alpha: float = Field(..., ge=0, le=1)
    rho_beta: float = Field(..., ge=0, le=1)
    gamma_r: float = 0.0
    scheme: Literal["ladder", "site"] = "ladder"
    rung_currents: List[float] = Field(default_factory=list)
    site_currents: List[float] = Field(default_factory=list)
    non_unimodal: bool = False
    load_at_boundary: bool = Field(False, description="gamma_t_star is an end of the load scan range")
    failed_loads: int = Field(0, ge=0, description="Loads whose steady state could not be solved")
    kernel_dim: int = 1
    residual: float = 0.0
    trace_dev: float = 0.0
    hermiticity_dev: float = 0.0
    min_eigenvalue: float = 0.0

    @property
    def p_net_per_site(self) -> float:
        return self.p_net / self.n_sites

    def row(self) -> Dict[str, float]:
        """Flat CSV row (list-valued fields dropped)"""
        data = self.model_dump(exclude={"rung_currents", "site_currents"})
        data["p_net_per_site"] = self.p_net_per_site
        return data


POWER_COLUMNS = [
    "n_sites", "gamma_r", "scheme", "gamma_t_star", "current", "voltage",
    "p_out", "p_in", "p_net", "p_net_per_site", "rho_alpha", "rho_beta",
    "non_unimodal", "load_at_boundary", "failed_loads", "kernel_dim", "residual", "trace_dev", "hermiticity_dev",
    "min_eigenvalue",
]

# Column layouts of the CSV files written by each subcommand
RESULT_COLUMNS: Dict[str, List[str]] = {
    "solve": POWER_COLUMNS + ["status", "error"],
    "grid": ["suppression"] + POWER_COLUMNS + ["status", "error"],
    "scaling_power": POWER_COLUMNS + ["status", "error"],
    "scaling_strength": [
        "n_sites", "gs_strength", "parallel_strength", "dicke_strength", "independent_strength",
        "gs_per_site", "parallel_per_site", "dicke_per_site", "independent_per_site", "status", "error",
    ],
    "phasemap": ["t_vib", "tau_l", "r_nn", "theta_eq", "theta_zen", "p_net", "positive", "status", "error"],
    "angles": ["theta_eq", "theta_zen", "p_net", "status", "error"],
    "spectrum_transitions": ["source", "target", "omega", "dipole_sq", "strength", "klass"],
    "spectrum_histogram": ["bath", "klass", "bin_lo", "bin_hi", "weight"],
    "processmap": ["bath", "site", "source", "target", "source_manifold", "target_manifold", "omega", "relative_strength"],
    "ensemble": ["trial", "seed", "status", "error"],
}


class RunManifest(BaseModel):
    """Traceability record written next to every set of artifacts"""
    subcommand: str
    config_hash: str = Field(..., description="SHA-256 of the canonical config JSON")
    seed: int
    workers: int
    versions: Dict[str, str]
    wall_time: float = Field(..., description="Seconds")
    artifacts: List[str]
    created_at: datetime
