"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
physics-domain problems exit 3, I/O problems exit 4.
"""


class ConfigError(ValueError):
    """Malformed or incomplete configuration (schema, units, unknown keys)."""


class PlanError(ConfigError):
    """Calibration/measurement plan is degenerate or missing entries."""


class PhysicsError(ValueError):
    """Inputs outside the physical domain (negative rates, unstable drift, ...)."""


class EstimationError(PhysicsError):
    """Reconstruction failed on inconsistent inputs; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
