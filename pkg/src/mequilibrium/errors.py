"""Exception types shared across modules; the CLI maps them to exit codes."""


class MEquilibriumError(Exception):
    """Base class for library errors."""


class ShapeError(MEquilibriumError, ValueError):
    """Array or profile dimensions do not match the game."""


class ValidationError(MEquilibriumError, ValueError):
    """Input violates a documented precondition."""


class DomainError(ValidationError):
    """Numeric argument outside its admissible range."""


class FormatError(ValidationError):
    """A file does not follow the documented layout."""


class CapabilityError(MEquilibriumError, NotImplementedError):
    """The request is outside what the chosen method supports."""


class ContinuationError(MEquilibriumError, RuntimeError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message, residual=None, parameter=None):
        super().__init__(message)
        self.residual = residual
        self.parameter = parameter
