"""Exception types shared across the package."""


class TailboundError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TailboundError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(DomainError):
    """Inputs violate a method's applicability condition; the bound is not
    defined there rather than merely loose."""


class InfeasibleMomentError(DomainError):
    """A moment sequence admits no [0,1]-valued random variable (detected
    through a negative polynomial weight)."""


class InternalConsistencyError(TailboundError):
    """A derived quantity violated an identity that valid inputs guarantee."""


class ResourceLimitError(TailboundError):
    """A computation would exceed the configured size limits."""


class SamplingExhaustedError(TailboundError):
    """Randomized member construction failed within its retry budget."""


class ValidationError(TailboundError):
    """An instance document failed validation.

    Carries every violation found, not just the first.
    """

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))
