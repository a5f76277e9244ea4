"""Tests of the five methods against direct-formula oracles and spec edge cases."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from nbratio.design import EfficacyDesign, TypologyGroup
from nbratio.distributions import BetaParams
from nbratio.errors import (
    MomentMatchInfeasibleError,
    NegativeEfficacyUnsupportedError,
)
from nbratio.estimators import PairedDataset, summarize
from nbratio.methods import (
    AnalysisOptions,
    KScaling,
    Method,
    analyze_all,
    asymptotic_ci,
    beta_central_moments,
    beta_crude_moments,
    binomial_ci,
    bnb_posterior_params,
    bnb_test,
    gamma_ci,
    transform_derivatives,
    transformed_success_prob,
    waavp_ci,
)

# fixed synthetic paired dataset (gamma-Poisson draw, frozen)
PRE = [42, 11, 61, 4, 63, 22, 11, 1, 38, 1, 27, 12, 26, 50, 123, 18, 19, 108, 72, 68]
POST = [16, 6, 42, 6, 15, 8, 16, 2, 7, 1, 3, 3, 12, 10, 23, 39, 26, 12, 24, 11]

DESIGN = EfficacyDesign(target=0.70, margin=0.05)


@pytest.fixture(scope="module")
def synthetic_summary():
    return summarize(PairedDataset(PRE, POST))


def _hand_stats():
    x = np.asarray(PRE, dtype=float)
    y = np.asarray(POST, dtype=float)
    n = len(x)
    sx2 = x.var(ddof=1)
    sy2 = y.var(ddof=1)
    cov = float(np.cov(x, y, ddof=1)[0, 1])
    rho = cov / math.sqrt(sx2 * sy2)
    return x.mean(), y.mean(), sx2, sy2, cov, rho, n


class TestWaavp:
    def test_degenerate_when_post_sum_zero(self):
        summary = summarize(PairedDataset([10, 50, 7, 22], [0, 0, 0, 0]))
        outcome = waavp_ci(summary, EfficacyDesign(0.95, 0.05))
        assert outcome.degenerate == "sum-post-zero"
        assert outcome.lcl is None and outcome.ucl is None
        assert outcome.classification.group is TypologyGroup.INCONCLUSIVE

    def test_zero_variance_limits_collapse_to_estimate(self):
        summary = summarize(PairedDataset([40] * 6, [10] * 6))
        outcome = waavp_ci(summary, DESIGN)
        assert outcome.lcl == pytest.approx(outcome.r_hat, abs=1e-12)
        assert outcome.ucl == pytest.approx(outcome.r_hat, abs=1e-12)

    def test_direct_formula_oracle(self, synthetic_summary):
        xbar, ybar, sx2, sy2, cov, _, n = _hand_stats()
        v = sx2 / (n * xbar**2) + sy2 / (n * ybar**2) - 2 * cov / (n * xbar * ybar)
        t = stats.t.ppf(0.975, n - 1)
        lcl = 1 - (ybar / xbar) * math.exp(t * math.sqrt(v))
        ucl = 1 - (ybar / xbar) * math.exp(-t * math.sqrt(v))
        outcome = waavp_ci(synthetic_summary, DESIGN)
        assert outcome.lcl == pytest.approx(lcl, rel=1e-10)
        assert outcome.ucl == pytest.approx(ucl, rel=1e-10)

    def test_literal_variance_switch(self, synthetic_summary):
        xbar, ybar, sx2, sy2, cov, _, n = _hand_stats()
        v = sx2 / (n * xbar) + sy2 / (n * ybar) - 2 * cov / (n * xbar * ybar)
        t = stats.t.ppf(0.975, n - 1)
        expected_lcl = 1 - (ybar / xbar) * math.exp(t * math.sqrt(v))
        outcome = waavp_ci(
            synthetic_summary, DESIGN, AnalysisOptions(waavp_literal_variance=True)
        )
        assert outcome.lcl == pytest.approx(expected_lcl, rel=1e-10)


class TestGamma:
    def test_shape_scale_product_is_mean(self, synthetic_summary):
        xbar, ybar, sx2, sy2, cov, rho, n = _hand_stats()
        ratio = ybar / xbar
        v = (ratio**2 / n) * (
            sx2 / xbar**2 + sy2 / ybar**2 - 2 * rho * math.sqrt(sx2 * sy2) / (xbar * ybar)
        )
        shape = (1 - synthetic_summary.r_hat) ** 2 / v
        scale = v / (1 - synthetic_summary.r_hat)
        assert shape * scale == pytest.approx(1 - synthetic_summary.r_hat, rel=1e-12)

    def test_degenerate_when_post_sum_zero(self):
        summary = summarize(PairedDataset([10, 50, 7, 22], [0, 0, 0, 0]))
        assert gamma_ci(summary, DESIGN).degenerate == "sum-post-zero"

    def test_direct_formula_oracle(self, synthetic_summary):
        xbar, ybar, sx2, sy2, cov, rho, n = _hand_stats()
        ratio = ybar / xbar
        v = (ratio**2 / n) * (
            sx2 / xbar**2 + sy2 / ybar**2 - 2 * rho * math.sqrt(sx2 * sy2) / (xbar * ybar)
        )
        shape = ratio**2 / v
        scale = v / ratio
        lcl = 1 - stats.gamma.ppf(0.975, shape, scale=scale)
        ucl = 1 - stats.gamma.ppf(0.025, shape, scale=scale)
        outcome = gamma_ci(synthetic_summary, DESIGN)
        assert outcome.lcl == pytest.approx(lcl, rel=1e-9)
        assert outcome.ucl == pytest.approx(ucl, rel=1e-9)

    def test_zero_variance_collapses(self):
        summary = summarize(PairedDataset([40] * 6, [10] * 6))
        outcome = gamma_ci(summary, DESIGN)
        assert outcome.lcl == outcome.ucl == pytest.approx(summary.r_hat)


class TestBinomial:
    def test_total_reduction_closed_form(self):
        # sums 100 / 0: posterior Beta(1, 101) has closed-form quantiles
        summary = summarize(PairedDataset([25, 25, 25, 25], [0, 0, 0, 0]))
        outcome = binomial_ci(summary, EfficacyDesign(0.95, 0.05))
        assert outcome.lcl == pytest.approx(1 - 0.03586462039000372, rel=1e-10)
        assert outcome.ucl == pytest.approx(1 - (1 - 0.975 ** (1 / 101)), rel=1e-8)
        assert outcome.lcl == pytest.approx(0.9641, abs=5e-5)
        assert outcome.ucl == pytest.approx(0.99975, abs=5e-6)

    def test_equal_sums_boundary_executes(self):
        # sum_post == sum_pre = 15: posterior Beta(16, 1), cdf x^16, near r = 0
        summary = summarize(PairedDataset([5, 7, 3], [7, 5, 3]))
        outcome = binomial_ci(summary, DESIGN)
        assert outcome.degenerate is None
        assert 0.0 <= outcome.lcl < outcome.ucl < 0.5
        assert outcome.lcl == pytest.approx(1 - 0.975 ** (1 / 16), rel=1e-6)
        assert outcome.ucl == pytest.approx(1 - 0.025 ** (1 / 16), rel=1e-6)

    def test_negative_efficacy_rejected(self):
        summary = summarize(PairedDataset([2, 3, 1], [9, 8, 7]))
        with pytest.raises(NegativeEfficacyUnsupportedError):
            binomial_ci(summary, DESIGN)

    def test_huge_pre_sum_total_reduction_is_adequate(self):
        summary = summarize(PairedDataset([1255] * 91, [0] * 91))
        outcome = binomial_ci(summary, EfficacyDesign(0.95, 0.05))
        assert outcome.classification.group is TypologyGroup.ADEQUATE

    def test_99_level_wider_than_95(self, synthetic_summary):
        narrow = binomial_ci(synthetic_summary, DESIGN)
        wide = binomial_ci(synthetic_summary, DESIGN, AnalysisOptions(binomial_99=True))
        assert wide.lcl < narrow.lcl and wide.ucl > narrow.ucl

    def test_direct_formula_oracle(self, synthetic_summary):
        sx, sy = sum(PRE), sum(POST)
        lcl = 1 - stats.beta.ppf(0.975, 1 + sy, 1 + sx - sy)
        ucl = 1 - stats.beta.ppf(0.025, 1 + sy, 1 + sx - sy)
        outcome = binomial_ci(synthetic_summary, DESIGN)
        assert outcome.lcl == pytest.approx(lcl, rel=1e-10)
        assert outcome.ucl == pytest.approx(ucl, rel=1e-10)


class TestAsymptotic:
    def test_zero_variances_zero_width(self):
        summary = summarize(PairedDataset([40] * 6, [10] * 6))
        outcome = asymptotic_ci(summary, DESIGN)
        assert outcome.lcl == outcome.ucl == pytest.approx(summary.r_hat)

    def test_rho_zero_matches_unpaired(self):
        # same counts, pairing on/off: with rho treated as 0 they coincide
        pre = [5, 9, 14, 3, 8, 11]
        post = [2, 6, 1, 9, 4, 7]
        paired_summary = summarize(PairedDataset(pre, post, paired=True))
        unpaired_summary = summarize(PairedDataset(pre, post, paired=False))
        forced = paired_summary.__class__(
            **{**paired_summary.__dict__, "rho": 0.0}
        )
        a = asymptotic_ci(forced, DESIGN)
        b = asymptotic_ci(unpaired_summary, DESIGN)
        assert a.lcl == pytest.approx(b.lcl, rel=1e-12)
        assert a.ucl == pytest.approx(b.ucl, rel=1e-12)

    def test_degenerate_when_post_sum_zero(self):
        summary = summarize(PairedDataset([10, 50, 7, 22], [0, 0, 0, 0]))
        assert asymptotic_ci(summary, DESIGN).degenerate == "sum-post-zero"

    def test_direct_formula_oracle(self, synthetic_summary):
        xbar, ybar, sx2, sy2, cov, rho, n = _hand_stats()
        delta2 = ((ybar / xbar**2) ** 2 * sx2 + sy2 / xbar**2) * (1 - rho)
        half = stats.norm.ppf(0.975) * math.sqrt(delta2 / n)
        outcome = asymptotic_ci(synthetic_summary, DESIGN)
        assert outcome.lcl == pytest.approx(synthetic_summary.r_hat - half, rel=1e-10)
        assert outcome.ucl == pytest.approx(synthetic_summary.r_hat + half, rel=1e-10)


class TestTransform:
    def test_direct_substitution(self):
        assert transformed_success_prob(0.5, 2.0, 1.0, 0.5) == pytest.approx(0.5)

    def test_identity_when_shapes_equal_no_reduction(self):
        for p in [0.01, 0.3, 0.97]:
            assert transformed_success_prob(p, 1.7, 1.7, 0.0) == pytest.approx(p)

    @settings(max_examples=200, deadline=None)
    @given(
        p1=st.floats(0.05, 0.95),
        k1=st.floats(0.1, 5.0),
        k2=st.floats(0.1, 5.0),
        r=st.floats(0.0, 0.9),
    )
    def test_derivatives_match_finite_differences(self, p1, k1, k2, r):
        # double-precision sanity check; the strict 1e-6 relative comparison
        # against a high-precision differentiator runs in the acceptance suite
        a = k1 * (1 - r)
        d = p1 * (a - k2) + k2
        if abs(d) < 0.05:
            return  # close to the singular denominator
        derivs = transform_derivatives(p1, k1, k2, r)

        def grid(h, span):
            return [transformed_success_prob(p1 + j * h, k1, k2, r) for j in range(-span, span + 1)]

        h1 = 1e-5
        g1 = grid(h1, 1)
        fd1 = (g1[2] - g1[0]) / (2 * h1)
        h2 = 1e-4
        g2 = grid(h2, 1)
        fd2 = (g2[2] - 2 * g2[1] + g2[0]) / h2**2
        h3 = 1e-3
        g3 = grid(h3, 2)
        fd3 = (-g3[0] + 2 * g3[1] - 2 * g3[3] + g3[4]) / (2 * h3**3)
        fd4 = (g3[0] - 4 * g3[1] + 6 * g3[2] - 4 * g3[3] + g3[4]) / h3**4
        assert fd1 == pytest.approx(derivs[0], rel=1e-4, abs=1e-8)
        assert fd2 == pytest.approx(derivs[1], rel=1e-3, abs=1e-4)
        assert fd3 == pytest.approx(derivs[2], rel=1e-2, abs=1e-1)
        assert fd4 == pytest.approx(derivs[3], rel=1e-1, abs=10.0)


class TestBetaMoments:
    def test_crude_moments_product_form(self):
        moments = beta_crude_moments(3.0, 4.0, upto=3)
        assert moments[1] == pytest.approx(3 / 7)
        assert moments[2] == pytest.approx((3 / 7) * (4 / 8))
        assert moments[3] == pytest.approx((3 / 7) * (4 / 8) * (5 / 9))

    def test_second_central_moment_closed_form(self):
        a, b = 6.0, 11.0
        c2, _, _, _ = beta_central_moments(a, b)
        assert c2 == pytest.approx(a * b / ((a + b) ** 2 * (a + b + 1)), rel=1e-12)

    def test_central_moments_match_monte_carlo(self):
        a, b = 30.0, 40.0
        rng = np.random.default_rng(2024)
        draws = rng.beta(a, b, size=10_000_000)
        mu = draws.mean()
        centred = draws - mu
        c2, c3, c4, c5 = beta_central_moments(a, b)
        for order, closed in [(2, c2), (3, c3), (4, c4), (5, c5)]:
            sample = centred**order
            estimate = sample.mean()
            se = sample.std() / math.sqrt(len(draws))
            assert abs(estimate - closed) < 5 * se


class TestBnbPosterior:
    def test_identity_transform_recovers_posterior(self):
        params = bnb_posterior_params(
            sum_x=120, n1=10, n2=10, k1=0.9, k2=0.9, r0=0.0, prior=BetaParams(1, 1)
        )
        a1 = 1 + 120
        b1 = 1 + 0.9 * 10
        assert params.alpha == pytest.approx(a1, rel=1e-9)
        assert params.beta == pytest.approx(b1, rel=1e-9)
        assert params.n_failures == pytest.approx(9.0)

    def test_delta_moments_match_transform_monte_carlo(self):
        # posterior Beta(30, 40): prior (1, 1) with sum_x = 29 and k1*n1 = 39
        a1, b1, k1, k2, r0 = 30.0, 40.0, 0.8, 0.6, 0.7
        params = bnb_posterior_params(
            sum_x=29, n1=39, n2=5, k1=k1, k2=k2, r0=r0, prior=BetaParams(1.0, 1.0 + 39.0 - k1 * 39)
        )
        # 1e6 posterior draws pushed through the transform
        rng = np.random.default_rng(77)
        p1 = rng.beta(a1, b1, size=1_000_000)
        p2 = transformed_success_prob(p1, k1, k2, r0)
        mean_mc, var_mc = float(p2.mean()), float(p2.var())
        mean_fit = params.alpha / (params.alpha + params.beta)
        var_fit = (
            params.alpha
            * params.beta
            / ((params.alpha + params.beta) ** 2 * (params.alpha + params.beta + 1))
        )
        assert mean_fit == pytest.approx(mean_mc, rel=1e-3)
        assert var_fit == pytest.approx(var_mc, rel=1e-2)

    def test_full_reduction_returns_degenerate_marker(self):
        assert (
            bnb_posterior_params(100, 10, 10, 0.8, 0.8, r0=1.0, prior=BetaParams(1, 1))
            is None
        )

    def test_infeasible_moment_match_raises(self):
        # near-singular transform denominator blows up the series variance
        with pytest.raises(MomentMatchInfeasibleError):
            bnb_posterior_params(
                1000, 2, 2, k1=0.01, k2=5.0, r0=0.0, prior=BetaParams(1.0, 1.0)
            )


def _summary_with(sum_post: int, base):
    return base.__class__(**{**base.__dict__, "sum_post": sum_post})


class TestBnbTest:
    def test_strong_reduction_classified_reduced(self):
        # far below a 0.70 target: reject inferiority null only
        rng = np.random.default_rng(5)
        g = rng.gamma(0.84, size=91)
        pre = rng.poisson(74 * g / 0.84)
        post = rng.poisson(0.47 * 74 * rng.gamma(0.58, size=91) / 0.58)
        summary = summarize(PairedDataset(pre, post))
        outcome = bnb_test(summary, EfficacyDesign(0.70, 0.05))
        assert outcome.p_inferiority < 0.001
        assert outcome.p_noninferiority > 0.9
        assert outcome.classification.group is TypologyGroup.REDUCED

    def test_total_reduction_classified_adequate(self):
        summary = summarize(PairedDataset([1255] * 91, [0] * 91))
        outcome = bnb_test(summary, EfficacyDesign(0.95, 0.05))
        assert outcome.p_noninferiority < 0.001
        assert outcome.p_inferiority == 1.0
        assert outcome.classification.group is TypologyGroup.ADEQUATE

    def test_pvalue_monotonicity_in_post_sum(self):
        base = summarize(PairedDataset([30, 74, 120, 64, 81, 99, 45, 70] * 4,
                                       [10, 30, 41, 20, 33, 41, 15, 25] * 4))
        p_inf, p_non = [], []
        for sy in range(0, 800, 40):
            outcome = bnb_test(_summary_with(sy, base), EfficacyDesign(0.70, 0.05))
            p_inf.append(outcome.p_inferiority)
            p_non.append(outcome.p_noninferiority)
        assert all(b <= a + 1e-12 for a, b in zip(p_inf, p_inf[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(p_non, p_non[1:]))

    def test_k_scaling_direction(self):
        # dividing k by (1 - rho) tightens the null; multiplying loosens it
        rng = np.random.default_rng(11)
        g = rng.gamma(0.9, size=60)
        pre = rng.poisson(50 * g / 0.9)
        post = rng.poisson(0.3 * 50 * (0.7 * g + rng.gamma(0.27, size=60)) / 0.9)
        summary = summarize(PairedDataset(pre, post))
        assert summary.rho is not None and summary.rho > 0.2
        divide = bnb_test(summary, DESIGN, AnalysisOptions(k_scaling=KScaling.DIVIDE))
        multiply = bnb_test(summary, DESIGN, AnalysisOptions(k_scaling=KScaling.MULTIPLY))
        # the observed sum sits below the inferiority null mean here, so a
        # tighter null distribution makes P(S >= sum) smaller
        assert divide.p_inferiority < multiply.p_inferiority


class TestAnalyzeAll:
    def test_zero_post_sum_pattern(self):
        outcomes = analyze_all(
            PairedDataset([1255] * 91, [0] * 91), EfficacyDesign(0.95, 0.05)
        )
        by_method = {o.method: o for o in outcomes}
        for method in (Method.WAAVP, Method.GAMMA, Method.ASYMPTOTIC):
            assert by_method[method].degenerate == "sum-post-zero"
        for method in (Method.BINOMIAL, Method.BNB):
            assert by_method[method].degenerate is None
            assert by_method[method].classification.group is TypologyGroup.ADEQUATE

    def test_identical_pre_post_all_reduced(self):
        rng = np.random.default_rng(3)
        counts = rng.poisson(30, size=60) + 1
        outcomes = analyze_all(
            PairedDataset(counts, counts), EfficacyDesign(0.95, 0.05)
        )
        for outcome in outcomes:
            assert outcome.degenerate is None
            assert outcome.classification.group is TypologyGroup.REDUCED

    def test_empty_method_list(self):
        outcomes = analyze_all(
            PairedDataset([5, 9, 2], [1, 2, 3]), DESIGN, methods=()
        )
        assert outcomes == []

    def test_negative_efficacy_captured_as_outcome(self):
        outcomes = analyze_all(
            PairedDataset([2, 3, 1], [9, 8, 7]),
            DESIGN,
            methods=(Method.BINOMIAL,),
        )
        assert outcomes[0].degenerate == "negative-efficacy-unsupported"

    @settings(max_examples=20, deadline=None)
    @given(
        alpha1=st.floats(0.01, 0.2),
        alpha2=st.floats(0.01, 0.2),
    )
    def test_wider_alpha_never_reverses_limits(self, alpha1, alpha2):
        summary = summarize(PairedDataset(PRE, POST))
        lo, hi = sorted([alpha1, alpha2])
        for method_fn in (waavp_ci, gamma_ci, binomial_ci, asymptotic_ci):
            narrow = method_fn(summary, EfficacyDesign(0.7, 0.05, alpha=hi))
            wide = method_fn(summary, EfficacyDesign(0.7, 0.05, alpha=lo))
            assert narrow.lcl <= narrow.ucl
            assert wide.lcl <= wide.ucl
            assert wide.lcl <= narrow.lcl + 1e-12
            assert wide.ucl >= narrow.ucl - 1e-12
