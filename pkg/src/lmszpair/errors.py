"""Exception types shared across the package."""


class LmszError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(LmszError, ValueError):
    """An argument violates a documented precondition."""


class IntegrationError(LmszError, RuntimeError):
    """Adaptive integration failed (step-size underflow / stiffness).

    Attributes
    ----------
    last_tau : float
        Last time at which the integrator held a valid state.
    """

    def __init__(self, message: str, last_tau: float):
        super().__init__(f"{message} (last good tau = {last_tau:.6g})")
        self.last_tau = last_tau


class PoleError(LmszError, ValueError):
    """Evaluation requested exactly at a pole of the Gamma function."""

    def __init__(self, location: complex):
        super().__init__(f"Gamma function pole at z = {location}")
        self.location = location


class RangeError(LmszError, ValueError):
    """Argument outside the documented overflow guard of a special function."""


class EstimationError(LmszError, RuntimeError):
    """A fit or inversion could not identify the requested parameter."""


class ConfigurationError(LmszError, ValueError):
    """Inconsistent run configuration (grids, discretization, schema)."""
