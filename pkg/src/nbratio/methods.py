"""The five ratio-of-means methods and the combined per-dataset report.

Interval methods (normal-approximation "WAAVP", gamma delta-method,
conjugate-beta binomial, asymptotic delta-method) yield confidence limits
for the reduction r = 1 - mean_post/mean_pre; the beta-negative-binomial
test instead yields one-sided p-values for the inferiority and
non-inferiority nulls by comparing the post-treatment sum to its compound
null distribution.  All functions are pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .design import EfficacyDesign, Typology, classify, classify_fine
from .distributions import (
    BetaParams,
    BnbParams,
    beta_quantile,
    bnb_cdf,
    bnb_sf,
    gamma_quantile,
    normal_quantile,
    student_t_quantile,
)
from .errors import (
    DomainError,
    EstimateUndefinedError,
    MomentMatchInfeasibleError,
    NegativeEfficacyUnsupportedError,
)
from .estimators import PairedDataset, SampleSummary, summarize

DEGENERATE_SUM_POST_ZERO = "sum-post-zero"
DEGENERATE_NEGATIVE_VARIANCE = "negative-variance"
DEGENERATE_NEGATIVE_EFFICACY = "negative-efficacy-unsupported"
DEGENERATE_MOMENT_MATCH = "moment-match-infeasible"

# Guard for the (1 - correlation) adjustments; perfectly correlated samples
# would otherwise divide by zero.
_MIN_ONE_MINUS_RHO = 1e-9


class Method(str, enum.Enum):
    WAAVP = "waavp"
    GAMMA = "gamma"
    BINOMIAL = "binomial"
    ASYMPTOTIC = "asymptotic"
    BNB = "bnb"


ALL_METHODS = tuple(Method)


class KScaling(str, enum.Enum):
    DIVIDE = "divide"
    MULTIPLY = "multiply"


@dataclass(frozen=True)
class AnalysisOptions:
    prior: BetaParams = BetaParams(1.0, 1.0)
    binomial_99: bool = False
    waavp_literal_variance: bool = False
    k_scaling: KScaling = KScaling.DIVIDE


@dataclass(frozen=True)
class MethodOutcome:
    method: Method
    r_hat: float
    classification: Typology
    lcl: float | None = None
    ucl: float | None = None
    p_inferiority: float | None = None
    p_noninferiority: float | None = None
    degenerate: str | None = None


def _degenerate_outcome(method: Method, summary: SampleSummary, reason: str) -> MethodOutcome:
    # No rejection on either test when the method cannot produce evidence.
    return MethodOutcome(
        method=method,
        r_hat=summary.r_hat,
        classification=Typology(classify(False, False), None),
        degenerate=reason,
    )


def _interval_outcome(
    method: Method, summary: SampleSummary, design: EfficacyDesign, lcl: float, ucl: float
) -> MethodOutcome:
    return MethodOutcome(
        method=method,
        r_hat=summary.r_hat,
        lcl=lcl,
        ucl=ucl,
        classification=classify_fine(lcl, ucl, summary.r_hat, design),
    )


def _pair_cov(summary: SampleSummary) -> float:
    return summary.cov if (summary.paired and summary.cov is not None) else 0.0


def _pair_rho(summary: SampleSummary) -> float:
    return summary.rho if (summary.paired and summary.rho is not None) else 0.0


def waavp_ci(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
) -> MethodOutcome:
    """Log-ratio t interval: limits 1 - (mean_post/mean_pre) * exp(+-t*sqrt(V)).

    The default variance uses squared means in the group denominators; the
    ``waavp_literal_variance`` switch keeps the plain means instead.
    """
    if summary.sum_post == 0:
        return _degenerate_outcome(Method.WAAVP, summary, DEGENERATE_SUM_POST_ZERO)
    n1, n2 = summary.n_pre, summary.n_post
    m1, m2 = summary.mean_pre, summary.mean_post
    cov = _pair_cov(summary)
    if options.waavp_literal_variance:
        v = summary.var_pre / (n1 * m1) + summary.var_post / (n2 * m2)
    else:
        v = summary.var_pre / (n1 * m1**2) + summary.var_post / (n2 * m2**2)
    if summary.paired:
        v -= 2.0 * cov / (n1 * m1 * m2)
    if v < 0:
        return _degenerate_outcome(Method.WAAVP, summary, DEGENERATE_NEGATIVE_VARIANCE)
    df = n1 - 1 if summary.paired else n1 + n2 - 2
    half = student_t_quantile(1.0 - design.alpha, df) * math.sqrt(v)
    ratio = m2 / m1
    return _interval_outcome(
        Method.WAAVP, summary, design, 1.0 - ratio * math.exp(half), 1.0 - ratio * math.exp(-half)
    )


def gamma_ci(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
) -> MethodOutcome:
    """Delta-method gamma interval for 1 - r with mean shape*scale = 1 - r_hat."""
    if summary.sum_post == 0:
        return _degenerate_outcome(Method.GAMMA, summary, DEGENERATE_SUM_POST_ZERO)
    n1, n2 = summary.n_pre, summary.n_post
    m1, m2 = summary.mean_pre, summary.mean_post
    ratio = m2 / m1
    if summary.paired:
        rho = _pair_rho(summary)
        v = (ratio**2 / n1) * (
            summary.var_pre / m1**2
            + summary.var_post / m2**2
            - 2.0 * rho * math.sqrt(summary.var_pre * summary.var_post) / (m1 * m2)
        )
    else:
        v = ratio**2 * (
            summary.var_pre / (n1 * m1**2) + summary.var_post / (n2 * m2**2)
        )
    if v <= 0:
        # Zero sampling variance: the interval collapses onto the estimate.
        return _interval_outcome(Method.GAMMA, summary, design, summary.r_hat, summary.r_hat)
    shape = (1.0 - summary.r_hat) ** 2 / v
    scale = v / (1.0 - summary.r_hat)
    return _interval_outcome(
        Method.GAMMA,
        summary,
        design,
        1.0 - gamma_quantile(1.0 - design.alpha, shape, scale),
        1.0 - gamma_quantile(design.alpha, shape, scale),
    )


def binomial_ci(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
) -> MethodOutcome:
    """Conjugate-beta interval from (1 - r) ~ Beta(a0 + sum_post, b0 + sum_pre - sum_post).

    Valid at a 100% observed reduction; known to be spuriously narrow, which
    the ``binomial_99`` switch partially compensates by using 99% limits.
    """
    sx, sy = summary.sum_pre, summary.sum_post
    if sy > sx:
        raise NegativeEfficacyUnsupportedError(
            f"binomial model needs sum_post <= sum_pre, got {sy} > {sx}"
        )
    posterior = BetaParams(options.prior.alpha + sy, options.prior.beta + sx - sy)
    alpha_eff = 0.005 if options.binomial_99 else design.alpha
    return _interval_outcome(
        Method.BINOMIAL,
        summary,
        design,
        1.0 - beta_quantile(1.0 - alpha_eff, posterior),
        1.0 - beta_quantile(alpha_eff, posterior),
    )


def asymptotic_ci(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
) -> MethodOutcome:
    """Normal delta-method interval; paired variances are scaled by (1 - correlation)."""
    if summary.sum_post == 0:
        return _degenerate_outcome(Method.ASYMPTOTIC, summary, DEGENERATE_SUM_POST_ZERO)
    m1, m2 = summary.mean_pre, summary.mean_post
    scale = 1.0 - _pair_rho(summary) if summary.paired else 1.0
    if summary.paired:
        var = ((m2 / m1**2) ** 2 * summary.var_pre + summary.var_post / m1**2) * scale
        var /= summary.n_pre
    else:
        var = (m2 / m1**2) ** 2 * summary.var_pre / summary.n_pre
        var += summary.var_post / (m1**2 * summary.n_post)
    half = normal_quantile(1.0 - design.alpha) * math.sqrt(max(0.0, var))
    return _interval_outcome(
        Method.ASYMPTOTIC, summary, design, summary.r_hat - half, summary.r_hat + half
    )


# --- beta-negative-binomial test -------------------------------------------


def transformed_success_prob(p1: float, k1: float, k2: float, r: float) -> float:
    """Post-treatment success probability implied by the pre-treatment one.

    Derived from matching mean_post = (1 - r) * mean_pre under NB shapes
    k1/k2 on the two sides.
    """
    num = p1 * k1 * (1.0 - r)
    return num / (num - p1 * k2 + k2)


def transform_derivatives(
    p1: float, k1: float, k2: float, r: float
) -> tuple[float, float, float, float]:
    """First four derivatives of the success-probability transform at p1."""
    a = k1 * (1.0 - r)
    w = a - k2
    d = p1 * w + k2
    c = a * k2
    return (
        c / d**2,
        -2.0 * c * w / d**3,
        6.0 * c * w**2 / d**4,
        -24.0 * c * w**3 / d**5,
    )


def beta_crude_moments(alpha: float, beta: float, upto: int = 5) -> list[float]:
    """E[X^v] for X ~ Beta(alpha, beta), v = 0..upto."""
    moments = [1.0]
    for j in range(upto):
        moments.append(moments[-1] * (alpha + j) / (alpha + beta + j))
    return moments


def beta_central_moments(alpha: float, beta: float) -> tuple[float, float, float, float]:
    """Central moments of orders 2..5 via binomial expansion of the crude moments."""
    crude = beta_crude_moments(alpha, beta, 5)
    mu = crude[1]
    central = []
    for order in range(2, 6):
        total = 0.0
        for j in range(order + 1):
            total += math.comb(order, j) * crude[j] * (-mu) ** (order - j)
        central.append(total)
    return tuple(central)


def bnb_posterior_params(
    sum_x: int,
    n1: int,
    n2: int,
    k1: float,
    k2: float,
    r0: float,
    prior: BetaParams = BetaParams(1.0, 1.0),
) -> BnbParams | None:
    """Null distribution parameters for the post-treatment sum.

    The conjugate beta posterior for the pre-treatment success probability
    is pushed through the success-probability transform with a fourth-order
    Taylor approximation of the mean/variance, then moment-matched back to
    a beta.  Returns None when the null efficacy is exactly 1, where the
    test statistic is identically zero.
    """
    if sum_x < 0 or n1 < 1 or n2 < 1:
        raise DomainError("sums and group sizes must be non-negative/positive")
    if not (k1 > 0 and k2 > 0):
        raise DomainError(f"shapes must be positive, got ({k1}, {k2})")
    if not (0.0 <= r0 <= 1.0):
        raise DomainError(f"null efficacy must lie in [0, 1], got {r0}")
    if r0 == 1.0:
        return None

    a1 = prior.alpha + sum_x
    b1 = prior.beta + k1 * n1
    m1 = a1 / (a1 + b1)
    c2, c3, c4, c5 = beta_central_moments(a1, b1)
    g = transformed_success_prob(m1, k1, k2, r0)
    g1, g2, g3, g4 = transform_derivatives(m1, k1, k2, r0)

    mean = g + 0.5 * g2 * c2
    var = (
        g1**2 * c2
        + g1 * g2 * c3
        + (g2**2 / 4.0 + g1 * g3 / 3.0) * c4
        + (g1 * g4 / 12.0 + g2 * g3 / 6.0) * c5
    )
    if not (0.0 < mean < 1.0) or var <= 0.0 or var >= mean * (1.0 - mean):
        raise MomentMatchInfeasibleError(
            f"cannot match a beta to mean {mean} and variance {var}"
        )
    nu = mean * (1.0 - mean) / var - 1.0
    return BnbParams(mean * nu, (1.0 - mean) * nu, n2 * k2)


def _effective_shapes(summary: SampleSummary, options: AnalysisOptions) -> tuple[float, float]:
    k1 = summary.k_pre
    if k1 is None:
        raise EstimateUndefinedError("pre-treatment shape unavailable")
    k2 = summary.k_post if summary.sum_post > 0 and summary.k_post is not None else k1
    rho = _pair_rho(summary)
    if options.k_scaling is KScaling.DIVIDE:
        factor = 1.0 / max(_MIN_ONE_MINUS_RHO, 1.0 - rho)
    else:
        factor = max(_MIN_ONE_MINUS_RHO, 1.0 - rho)
    return k1 * factor, k2 * factor


def bnb_test(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
) -> MethodOutcome:
    """One-sided p-values against the inferiority and non-inferiority nulls.

    p_inferiority = P(S >= sum_post) under the inferiority-threshold null;
    p_noninferiority = P(S <= sum_post) under the adequacy-threshold null.
    Pairing scales both shapes through the configured (1 - correlation) rule
    before the posterior is formed.
    """
    k1e, k2e = _effective_shapes(summary, options)
    sy = summary.sum_post

    def null_pvalue(r0: float, upper_tail: bool) -> float:
        params = bnb_posterior_params(
            summary.sum_pre, summary.n_pre, summary.n_post, k1e, k2e, r0, options.prior
        )
        if params is None:
            # Test statistic identically zero under a 100%-efficacy null.
            return (1.0 if sy == 0 else 0.0) if upper_tail else 1.0
        return bnb_sf(sy, params) if upper_tail else bnb_cdf(sy, params)

    try:
        p_inf = null_pvalue(design.threshold_inferiority, upper_tail=True)
        p_noninf = null_pvalue(design.threshold_adequacy, upper_tail=False)
    except MomentMatchInfeasibleError:
        return _degenerate_outcome(Method.BNB, summary, DEGENERATE_MOMENT_MATCH)
    return MethodOutcome(
        method=Method.BNB,
        r_hat=summary.r_hat,
        p_inferiority=p_inf,
        p_noninferiority=p_noninf,
        classification=Typology(
            classify(p_inf < design.alpha, p_noninf < design.alpha), None
        ),
    )


_DISPATCH = {
    Method.WAAVP: waavp_ci,
    Method.GAMMA: gamma_ci,
    Method.BINOMIAL: binomial_ci,
    Method.ASYMPTOTIC: asymptotic_ci,
    Method.BNB: bnb_test,
}


def analyze_summary(
    summary: SampleSummary,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
    methods: tuple[Method, ...] = ALL_METHODS,
) -> list[MethodOutcome]:
    """One outcome per requested method; per-method failures become degenerate outcomes."""
    outcomes = []
    for method in methods:
        try:
            outcomes.append(_DISPATCH[method](summary, design, options))
        except NegativeEfficacyUnsupportedError:
            outcomes.append(_degenerate_outcome(method, summary, DEGENERATE_NEGATIVE_EFFICACY))
        except MomentMatchInfeasibleError:
            outcomes.append(_degenerate_outcome(method, summary, DEGENERATE_MOMENT_MATCH))
    return outcomes


def analyze_all(
    data: PairedDataset,
    design: EfficacyDesign,
    options: AnalysisOptions = AnalysisOptions(),
    methods: tuple[Method, ...] = ALL_METHODS,
) -> list[MethodOutcome]:
    return analyze_summary(summarize(data), design, options, methods)
