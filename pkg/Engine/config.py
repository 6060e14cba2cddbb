# Process-level settings for the photocell engine.
# Run-level scenario parameters live in schemas.RunConfig; everything here is
# about how the engine runs (caps, tolerances, pools, logging).

from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"

    # Worker pool size used when neither the config nor --workers sets one
    GSSA_WORKERS: int = 1

    # Hilbert-space and study caps
    MAX_HILBERT_DIM: int = 2 ** 11
    POWER_MAX_SITES: int = 6
    STRENGTH_MAX_SITES: int = 10
    DIRECT_SOLVER_MAX_DIM: int = 128
    DENSE_KERNEL_MAX_DIM: int = 64

    # Steady-state tolerances
    KERNEL_TOL: float = 1e-10
    RESIDUAL_TOL: float = 1e-8
    TRACE_TOL: float = 1e-10
    HERMITICITY_TOL: float = 1e-10
    POSITIVITY_TOL: float = 1e-8
    INVERSE_POWER_SHIFT: float = 1e-10
    INVERSE_POWER_MAXITER: int = 200
    INVERSE_POWER_TOL: float = 1e-10

    # Frequencies below this (eV) count as degenerate (omega = 0 processes)
    FREQUENCY_FLOOR: float = 1e-9
    MANIFOLD_MIXING_TOL: float = 1e-6

    # Load (gamma_t) optimisation
    LOAD_SCAN_MIN: float = 1e-12
    LOAD_SCAN_MAX: float = 1e-1
    LOAD_SCAN_POINTS: int = 60
    LOAD_REFINE_RTOL: float = 0.01

    # Disorder sampling
    DISORDER_MAX_RESAMPLES: int = 100

    # Optional default output directory for CLI runs
    OUTPUT_DIR: Optional[str] = None

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")


# Create a single instance to be used throughout the engine
settings = Settings()
