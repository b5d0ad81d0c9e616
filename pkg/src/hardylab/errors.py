"""Exception hierarchy shared by every module of the lab."""


class HardyLabError(Exception):
    """Base class for all lab errors."""


class InvalidDimension(HardyLabError, ValueError):
    pass


class NonPowerOfTwo(HardyLabError, ValueError):
    pass


class ShapeMismatch(HardyLabError, ValueError):
    pass


class WeightOverflow(HardyLabError, FloatingPointError):
    """A weighted field left the representable range on the grid."""


class ContainmentViolation(HardyLabError):
    """Mass reached the edge of the periodic box."""


class Blowup(HardyLabError):
    pass


class NoConvergence(HardyLabError):
    pass


class DegenerateNorm(HardyLabError):
    pass


class NonPositiveValue(HardyLabError, ValueError):
    pass


class FitRejected(HardyLabError):
    pass


class InterpolationOutOfRange(HardyLabError):
    pass


class SupportViolation(HardyLabError):
    pass


class UnsupportedWeightKind(HardyLabError, ValueError):
    pass


class NegativeTimeDissipative(HardyLabError, ValueError):
    pass


class NotHermitian(HardyLabError, ValueError):
    pass


class ParseError(HardyLabError):
    pass


class ValidationError(HardyLabError):
    """Raised by the run-spec parser; ``violations`` lists ``(path, message)`` pairs."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{path or '<root>'}: {msg}" for path, msg in self.violations]
        super().__init__("; ".join(lines))
