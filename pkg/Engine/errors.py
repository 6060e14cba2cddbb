"""
Exception hierarchy

Every engine error carries a short machine-readable code so the CLI can emit
an error record instead of a traceback.
"""

from typing import Any, Dict, Optional


class EngineError(Exception):
    """Base class for all engine failures"""

    code = "engine_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_record(self) -> Dict[str, Any]:
        return {
            "error": self.code,
            "type": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class GeometryError(EngineError, ValueError):
    code = "degenerate_geometry"


class DimensionError(EngineError, ValueError):
    code = "dimension_cap_exceeded"


class NotHermitianError(EngineError, ValueError):
    code = "not_hermitian"


class CalibrationError(EngineError, ValueError):
    code = "calibration_failed"


class ConfigurationError(EngineError, ValueError):
    code = "invalid_configuration"


class SolverError(EngineError, RuntimeError):
    code = "solver_failure"


class StateValidationError(EngineError, RuntimeError):
    code = "invalid_state"


class VoltageUndefinedError(EngineError, ValueError):
    code = "voltage_undefined"


class SchemaMismatchError(EngineError, ValueError):
    code = "schema_mismatch"
