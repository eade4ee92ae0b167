"""Exception hierarchy for the solver library."""


class GKdVError(Exception):
    """Base class for all library errors."""


class StructuralError(GKdVError, ValueError):
    """Shape, length or parameter mismatch."""


class SymmetryError(GKdVError, ValueError):
    """Spectral coefficients do not describe a real field."""


class DomainError(GKdVError, ValueError):
    """Argument outside the domain of an operation."""


class ConfigurationError(GKdVError):
    """Missing table, missing derivative data or inconsistent configuration."""


class InsufficientDataError(GKdVError):
    """Too few usable samples for a fit."""


class TestFunctionError(GKdVError, ValueError):
    """Test function support touches the boundary of the domain."""

    __test__ = False


class QuadratureError(GKdVError):
    """Oscillatory quadrature did not reach its tolerance."""

    def __init__(self, message, partial=None, error_estimate=None):
        super().__init__(message)
        self.partial = partial
        self.error_estimate = error_estimate


class GrowthError(GKdVError, OverflowError):
    """Propagator factor overflows for some wavenumber."""

    def __init__(self, message, wavenumber=None):
        super().__init__(message)
        self.wavenumber = wavenumber


class DivergenceError(GKdVError):
    """A series or iteration diverged; carries the norm history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ConvergenceError(GKdVError):
    """Picard iteration failed to converge within max_iter."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BoundViolationError(GKdVError):
    """An iterate exceeded the a-priori blow-up guard."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
