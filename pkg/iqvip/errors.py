"""Exception hierarchy for the iqvip package."""

from typing import Any, Optional


class IqvipError(Exception):
    """Base class for every error raised by iqvip."""


class ContractViolationError(IqvipError, ValueError):
    """An argument broke an operation's precondition."""


class InvalidConstantsError(ContractViolationError):
    """Certificate constants are inconsistent or out of range."""


class OutOfDomainError(ContractViolationError):
    """A parameter lies outside the domain where a condition is defined."""


class NetworkFormatError(ContractViolationError):
    """A traffic network document is malformed."""


class UnsupportedVerificationError(IqvipError, TypeError):
    """The object cannot be verified (e.g. its set has no sampler)."""


class InsufficientSamplesError(IqvipError, ValueError):
    """Too few usable samples to produce an estimate."""


class InfeasibleNetworkError(IqvipError, ValueError):
    """Some origin-destination pair cannot be routed."""


class DivergenceError(IqvipError, ArithmeticError):
    """
    An iteration or trajectory left the finite region.

    Attributes:
        step: Iteration index of the first bad iterate, if discrete.
        time: Integration time of the blow-up, if continuous.
        trace: Partial trace up to the last finite state.
    """

    def __init__(
        self,
        message: str,
        *,
        step: Optional[int] = None,
        time: Optional[float] = None,
        trace: Any = None,
    ) -> None:
        super().__init__(message)
        self.step = step
        self.time = time
        self.trace = trace
