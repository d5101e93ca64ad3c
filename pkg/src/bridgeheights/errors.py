"""Exception hierarchy shared by every module."""


class BridgeHeightsError(Exception):
    """Base class. ``kind`` is the short tag used in structured CLI errors."""

    kind = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class DomainError(BridgeHeightsError, ValueError):
    kind = "domain"


class PoleProximityError(DomainError):
    kind = "pole_proximity"


class TruncationError(BridgeHeightsError, ArithmeticError):
    """A series did not reach its tolerance within the term cap.

    The partial sum is kept on ``partial_value`` so callers can still
    inspect what was accumulated.
    """

    kind = "truncation"

    def __init__(self, message, partial_value=None, **context):
        super().__init__(message, partial_value=partial_value, **context)
        self.partial_value = partial_value


class QuadratureError(BridgeHeightsError, ArithmeticError):
    kind = "quadrature"


class DegeneracyError(BridgeHeightsError, ArithmeticError):
    kind = "degeneracy"


class CapacityError(BridgeHeightsError, ValueError):
    kind = "capacity"
