"""Exception hierarchy for entrolab."""

from typing import Any, Optional


class EntrolabError(Exception):
    """Base class for all entrolab errors."""


class AmbientMismatch(EntrolabError):
    """Operands live in different ambient groups."""


class OrderBoundExceeded(EntrolabError):
    """A group is too large for an exhaustive computation."""

    def __init__(self, order: int, bound: int):
        super().__init__(f"group order {order} exceeds the configured bound {bound}")
        self.order = order
        self.bound = bound


class NoStabilization(EntrolabError):
    """An intersection chain was still descending when the prefix ran out."""


class BudgetExhausted(EntrolabError):
    """A computation ran out of steps before reaching a stationary value.

    The partial result (an ``at_least`` EntropyValue) is attached as
    ``partial``; a single cotrajectory also attaches its ``trace``.
    """

    def __init__(self, message: str, partial: Optional[Any] = None, trace: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial
        self.trace = trace


class TruncationTooLarge(EntrolabError):
    """A finite truncation would exceed the configured element bound."""

    def __init__(self, size: int, bound: int):
        super().__init__(f"truncation has {size} elements, bound is {bound}")
        self.size = size
        self.bound = bound


class VerificationFailed(EntrolabError):
    """A certificate witness check failed."""


class UnsupportedBandPattern(EntrolabError):
    """A banded endomorphism description cannot be handled."""


class ProblemFormatError(EntrolabError, ValueError):
    """A problem file does not follow the JSON problem format."""
