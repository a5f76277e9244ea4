"""Log-space count-distribution primitives.

Covers the negative binomial in its successes-before-failures
parameterization (real-valued failure count allowed), the beta-negative-
binomial compound distribution whose lower tail is accumulated by the pmf
ratio recurrence, and the gamma/beta/Student-t/normal quantiles needed by
the interval methods.  Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, SupportOverflowError

# Hard ceiling on the number of pmf terms accumulated for one tail
# probability; beyond this we refuse rather than silently truncate.
MAX_TAIL_TERMS = 10**6

_SUM_BLOCK = 256


def _compensated_sum(terms: np.ndarray) -> float:
    """Exactly-rounded sum of block partial sums (compensated across blocks)."""
    if terms.size <= _SUM_BLOCK:
        return math.fsum(terms.tolist())
    partials = np.add.reduceat(terms, np.arange(0, terms.size, _SUM_BLOCK))
    return math.fsum(partials.tolist())


def log_gamma(x: float) -> float:
    if x <= 0:
        raise DomainError(f"log_gamma requires a positive argument, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise DomainError(f"log_beta requires positive arguments, got ({a}, {b})")
    return float(special.betaln(a, b))


@dataclass(frozen=True)
class NegBinParams:
    """Negative binomial with shape ``k`` (real-valued failures) and mean."""

    k: float
    mean: float

    def __post_init__(self) -> None:
        if not (self.k > 0):
            raise DomainError(f"shape k must be positive, got {self.k}")
        if not (self.mean >= 0):
            raise DomainError(f"mean must be non-negative, got {self.mean}")

    @property
    def p(self) -> float:
        """Success probability mean/(mean + k), in [0, 1)."""
        return self.mean / (self.mean + self.k)

    @property
    def variance(self) -> float:
        return self.mean + self.mean**2 / self.k


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(
                f"beta parameters must be positive, got ({self.alpha}, {self.beta})"
            )


@dataclass(frozen=True)
class BnbParams:
    """Beta-negative-binomial: mixture of NB(n_failures, p) over p ~ Beta(alpha, beta)."""

    alpha: float
    beta: float
    n_failures: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0 and self.n_failures > 0):
            raise DomainError(
                "bnb parameters must be strictly positive, got "
                f"({self.alpha}, {self.beta}, {self.n_failures})"
            )


def _check_count(y: int, name: str = "count") -> int:
    if y != int(y) or y < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {y}")
    return int(y)


def nb_logpmf(y: int, params: NegBinParams) -> float:
    """Log pmf of the negative binomial at count ``y``.

    A zero mean degenerates to a point mass at zero: log 0 = -inf for y > 0.
    """
    y = _check_count(y)
    k, mean = params.k, params.mean
    if mean == 0:
        return 0.0 if y == 0 else -math.inf
    return (
        math.lgamma(y + k)
        - math.lgamma(k)
        - math.lgamma(y + 1)
        + k * (math.log(k) - math.log(k + mean))
        + y * (math.log(mean) - math.log(k + mean))
    )


def bnb_logpmf(s: int, params: BnbParams) -> float:
    """Log pmf of the beta-negative-binomial at count ``s`` (direct Gamma/Beta form)."""
    s = _check_count(s)
    a, b, n = params.alpha, params.beta, params.n_failures
    return (
        math.lgamma(n + s)
        - math.lgamma(n)
        - math.lgamma(s + 1)
        + float(special.betaln(b + n, a + s))
        - float(special.betaln(b, a))
    )


def bnb_pmf_terms(s_max: int, params: BnbParams) -> np.ndarray:
    """pmf values for s = 0..s_max via the ratio recurrence.

    The recurrence pmf(s+1)/pmf(s) = (n+s)(alpha+s) / ((s+1)(alpha+beta+n+s))
    is accumulated in log space (the linear-space product underflows once
    pmf(0) drops below the double-precision floor, which happens for large
    n_failures) and exponentiated at the end.
    """
    s_max = _check_count(s_max, "s_max")
    if s_max + 1 > MAX_TAIL_TERMS:
        raise SupportOverflowError(
            f"tail accumulation over {s_max + 1} support points exceeds the "
            f"{MAX_TAIL_TERMS}-term limit"
        )
    a, b, n = params.alpha, params.beta, params.n_failures
    logs = np.empty(s_max + 1)
    logs[0] = float(special.betaln(b + n, a)) - float(special.betaln(b, a))
    if s_max > 0:
        j = np.arange(s_max, dtype=np.float64)
        log_ratios = (
            np.log(n + j) + np.log(a + j) - np.log(j + 1.0) - np.log(a + b + n + j)
        )
        np.cumsum(log_ratios, out=logs[1:])
        logs[1:] += logs[0]
    return np.exp(logs)


def bnb_cdf(s: int, params: BnbParams) -> float:
    """P(S <= s); returns 0 for s < 0 so that sf(0) = 1 - cdf(-1) = 1."""
    if s < 0:
        return 0.0
    total = _compensated_sum(bnb_pmf_terms(int(s), params))
    return min(1.0, total)


def bnb_sf(s: int, params: BnbParams) -> float:
    """P(S >= s), computed as 1 - cdf(s - 1)."""
    if s <= 0:
        return 1.0
    return 1.0 - bnb_cdf(int(s) - 1, params)


def _check_prob(p: float) -> float:
    if not (0.0 < p < 1.0):
        raise DomainError(f"probability must lie strictly in (0, 1), got {p}")
    return float(p)


def _polish_gamma(x: float, p: float, shape: float) -> float:
    # Newton refinement of the unit-scale quantile; the library inverse can
    # leave ~1e-8 residuals at extreme shapes and the contract is 1e-12.
    for _ in range(3):
        residual = float(special.gammainc(shape, x)) - p
        if abs(residual) < 1e-13 or x <= 0:
            break
        log_pdf = (shape - 1.0) * math.log(x) - x - math.lgamma(shape)
        if log_pdf < -700:
            break
        step = residual / math.exp(log_pdf)
        candidate = x - step
        if candidate <= 0:
            candidate = x / 2.0
        x = candidate
    return x


def gamma_quantile(p: float, shape: float, scale: float) -> float:
    _check_prob(p)
    if shape <= 0 or scale <= 0:
        raise DomainError(f"gamma requires positive shape/scale, got ({shape}, {scale})")
    return _polish_gamma(float(special.gammaincinv(shape, p)), p, shape) * scale


def gamma_cdf(x: float, shape: float, scale: float) -> float:
    if shape <= 0 or scale <= 0:
        raise DomainError(f"gamma requires positive shape/scale, got ({shape}, {scale})")
    if x <= 0:
        return 0.0
    return float(special.gammainc(shape, x / scale))


def beta_quantile(p: float, params: BetaParams) -> float:
    _check_prob(p)
    a, b = params.alpha, params.beta
    x = float(special.betaincinv(a, b, p))
    for _ in range(3):
        if not (0.0 < x < 1.0):
            break
        residual = float(special.betainc(a, b, x)) - p
        if abs(residual) < 1e-13:
            break
        log_pdf = (
            (a - 1.0) * math.log(x)
            + (b - 1.0) * math.log1p(-x)
            - float(special.betaln(a, b))
        )
        if log_pdf < -700:
            break
        candidate = x - residual / math.exp(log_pdf)
        if not (0.0 < candidate < 1.0):
            candidate = x / 2.0 if residual > 0 else (1.0 + x) / 2.0
        x = candidate
    return x


def beta_cdf(x: float, params: BetaParams) -> float:
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    return float(special.betainc(params.alpha, params.beta, x))


def student_t_quantile(p: float, df: float) -> float:
    _check_prob(p)
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    return float(special.stdtrit(df, p))


def normal_quantile(p: float) -> float:
    _check_prob(p)
    return float(special.ndtri(p))
