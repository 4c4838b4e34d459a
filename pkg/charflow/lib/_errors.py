"""
charflow errors
"""


class CharflowError(Exception):
    """Base class of every error raised by the library."""


class ConfigError(CharflowError, ValueError):
    """Invalid problem or run configuration."""


class ExprError(CharflowError, ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f'{message} at offset {offset}')
        self.offset = offset


class UnknownIdentifierError(ExprError):
    pass


class UnboundVariableError(ExprError):
    pass


class ExprDomainError(ExprError, ArithmeticError):
    pass


class CurveError(CharflowError, ValueError):
    pass


class VanishingTangentError(CurveError):
    """A tangent component used for the Hermite magnitudes vanished."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class DegenerateAreaError(CurveError):
    pass


class InversionError(CurveError):
    pass


class NonMonotoneError(InversionError):
    pass


class ProjectionError(CharflowError):
    pass


class NoOverturnError(ProjectionError):
    pass


class EqualAreaError(ProjectionError):
    """The equal-area cut has no root inside its window.

    `direction` tells which neighbour the window should be merged with.
    """

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class ChainMismatchError(ProjectionError, ValueError):
    pass


class ShockError(CharflowError):
    pass


class OverlapError(ShockError):
    """A stage abscissa left the region of overlap."""

    def __init__(self, message, z=None, lo=None, hi=None):
        super().__init__(message)
        self.z = z
        self.lo = lo
        self.hi = hi


class MergeError(ShockError, ValueError):
    pass


class SolverError(CharflowError):
    def __init__(self, message, t=None, step=None):
        context = []
        if step is not None:
            context.append(f'step {step}')
        if t is not None:
            context.append(f't={t:.17g}')
        if context:
            message = f'{message} ({", ".join(context)})'
        super().__init__(message)
        self.t = t
        self.step = step
