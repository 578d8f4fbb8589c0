"""Exception hierarchy shared by the simulator modules."""


class BatteryError(Exception):
    """Base class for all errors raised by ``annni_battery``."""


class DomainError(BatteryError, ValueError):
    """Physically or structurally invalid parameters."""


class CapacityError(BatteryError):
    """Requested Hilbert-space dimension exceeds a configured cap."""


class NumericalError(BatteryError, ArithmeticError):
    """NaN/inf encountered or a unitarity/Hermiticity diagnostic failed."""


class ConvergenceError(NumericalError):
    """Iterative solver did not reach its tolerance.

    The last residual is kept on ``residual`` so callers can report it.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class StiffnessError(NumericalError):
    """Adaptive time stepping needed a substep below the allowed minimum."""
