"""Exception types shared across the package."""


class NbRatioError(ValueError):
    """Base class for all package-specific errors."""


class DomainError(NbRatioError):
    """An argument lies outside the mathematical domain of a function."""


class SupportOverflowError(NbRatioError):
    """A tail accumulation would need more support points than allowed."""


class EstimateUndefinedError(NbRatioError):
    """A sample statistic is undefined for the given data (e.g. zero pre-treatment mean)."""


class ShapeInestimableError(NbRatioError):
    """The negative binomial shape cannot be estimated (e.g. all counts zero)."""


class InconsistentReplicatesError(NbRatioError):
    """Replicate counts differ between subjects within a group."""


class MomentMatchInfeasibleError(NbRatioError):
    """Mean/variance pair cannot be matched by a beta distribution."""


class NegativeEfficacyUnsupportedError(NbRatioError):
    """The binomial-model interval requires post-treatment sum <= pre-treatment sum."""


class InfeasibleCorrelationError(NbRatioError):
    """Requested latent correlation exceeds the shared-shock feasibility bound."""


class ScanCancelledError(NbRatioError):
    """A Monte Carlo scan was cancelled before completion."""


class ParseError(NbRatioError):
    """A dataset file could not be parsed."""
