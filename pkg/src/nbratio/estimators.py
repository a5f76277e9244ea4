"""Sample summaries, negative binomial shape MLE and replicate pooling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import (
    EstimateUndefinedError,
    InconsistentReplicatesError,
    ShapeInestimableError,
)

K_MIN = 1e-4
K_MAX = 1e6

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_LOG_K_TOL = 1e-8


def _as_counts(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise EstimateUndefinedError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise EstimateUndefinedError(f"{name} is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.all(np.isfinite(arr)) or np.any(rounded != arr):
            raise EstimateUndefinedError(f"{name} must contain integers")
        arr = rounded.astype(np.int64)
    if np.any(arr < 0):
        raise EstimateUndefinedError(f"{name} must be non-negative")
    return arr.astype(np.int64)


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Pre/post count vectors with pairing metadata and replicate counts.

    Counts are totals per subject; ``m_pre``/``m_post`` record how many
    replicate observations were summed into each total (fitted means and
    shapes then describe the summed scale).
    """

    pre: np.ndarray
    post: np.ndarray
    paired: bool = True
    m_pre: int = 1
    m_post: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "pre", _as_counts(self.pre, "pre"))
        object.__setattr__(self, "post", _as_counts(self.post, "post"))
        if self.paired and self.pre.size != self.post.size:
            raise EstimateUndefinedError(
                f"paired data needs equal group sizes, got {self.pre.size} vs {self.post.size}"
            )
        if self.m_pre < 1 or self.m_post < 1:
            raise EstimateUndefinedError("replicate counts must be positive")

    @property
    def n_pre(self) -> int:
        return int(self.pre.size)

    @property
    def n_post(self) -> int:
        return int(self.post.size)


class ShapeEstimate(NamedTuple):
    k: float
    underdispersed: bool


@dataclass(frozen=True)
class SampleSummary:
    n_pre: int
    n_post: int
    paired: bool
    mean_pre: float
    mean_post: float
    var_pre: float
    var_post: float
    sum_pre: int
    sum_post: int
    r_hat: float
    cov: float | None = None
    rho: float | None = None
    k_pre: float | None = None
    k_post: float | None = None
    k_pre_underdispersed: bool = False
    k_post_underdispersed: bool = False


def _profile_loglik(k: float, counts: np.ndarray, xbar: float, total: float) -> float:
    # NB log likelihood with the mean profiled out at the sample mean
    # (the joint MLE of the mean is the sample mean for every k).
    n = counts.size
    return float(
        special.gammaln(counts + k).sum()
        - n * special.gammaln(k)
        + n * k * (math.log(k) - math.log(k + xbar))
        + total * (math.log(xbar) - math.log(k + xbar))
    )


def nb_shape_mle(counts) -> ShapeEstimate:
    """Maximum likelihood NB shape with the mean fixed at the sample mean.

    Golden-section search on log k over [K_MIN, K_MAX]; under-dispersed
    samples (variance <= mean) are clamped to K_MAX and flagged.
    """
    arr = _as_counts(counts, "counts")
    if arr.size < 2:
        raise ShapeInestimableError("need at least two observations")
    total = float(arr.sum())
    if total == 0:
        raise ShapeInestimableError("all counts are zero")
    xbar = total / arr.size
    var = float(arr.var(ddof=1))
    if var <= xbar:
        return ShapeEstimate(K_MAX, True)

    counts_f = arr.astype(np.float64)
    lo, hi = math.log(K_MIN), math.log(K_MAX)

    def objective(t: float) -> float:
        return _profile_loglik(math.exp(t), counts_f, xbar, total)

    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = objective(c), objective(d)
    while hi - lo > _LOG_K_TOL:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = objective(d)
    k = math.exp(0.5 * (lo + hi))
    if k >= K_MAX * (1.0 - 1e-6):
        return ShapeEstimate(K_MAX, False)
    if k <= K_MIN * (1.0 + 1e-6):
        return ShapeEstimate(K_MIN, False)
    return ShapeEstimate(k, False)


def nb_mle_k(counts) -> float:
    return nb_shape_mle(counts).k


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va <= 0 or vb <= 0:
        return None
    cov = float(np.sum((a - a.mean()) * (b - b.mean())) / (a.size - 1))
    return max(-1.0, min(1.0, cov / math.sqrt(va * vb)))


def summarize(data: PairedDataset, correlation: str = "pearson") -> SampleSummary:
    """All sample statistics the interval/test methods consume.

    Pairing statistics (covariance, correlation) are reported only for
    paired data with non-degenerate variances; the post-treatment shape is
    absent when the post-treatment sum is zero.  ``correlation`` picks the
    estimator feeding the paired adjustments: "pearson" (default, on the
    observed counts) or "spearman" (on ranks).
    """
    if correlation not in ("pearson", "spearman"):
        raise EstimateUndefinedError(f"unknown correlation estimator {correlation!r}")
    if data.n_pre < 2 or data.n_post < 2:
        raise EstimateUndefinedError("need at least two subjects per group")
    pre = data.pre.astype(np.float64)
    post = data.post.astype(np.float64)
    mean_pre = float(pre.mean())
    mean_post = float(post.mean())
    if mean_pre == 0:
        raise EstimateUndefinedError("pre-treatment mean is zero; reduction undefined")
    var_pre = float(pre.var(ddof=1))
    var_post = float(post.var(ddof=1))

    cov = rho = None
    if data.paired:
        cov = float(np.sum((pre - mean_pre) * (post - mean_post)) / (data.n_pre - 1))
        if correlation == "pearson":
            rho = _pearson(pre, post)
        else:
            from scipy.stats import rankdata

            rho = _pearson(rankdata(pre), rankdata(post))

    k_pre = k_post = None
    pre_flag = post_flag = False
    k_pre, pre_flag = nb_shape_mle(data.pre)
    if post.sum() > 0:
        k_post, post_flag = nb_shape_mle(data.post)

    return SampleSummary(
        n_pre=data.n_pre,
        n_post=data.n_post,
        paired=data.paired,
        mean_pre=mean_pre,
        mean_post=mean_post,
        var_pre=var_pre,
        var_post=var_post,
        sum_pre=int(data.pre.sum()),
        sum_post=int(data.post.sum()),
        r_hat=1.0 - mean_post / mean_pre,
        cov=cov,
        rho=rho,
        k_pre=k_pre,
        k_post=k_post,
        k_pre_underdispersed=pre_flag,
        k_post_underdispersed=post_flag,
    )


def pool_replicates(raw: Sequence[Sequence[int]]) -> tuple[np.ndarray, int]:
    """Sum replicate observations per subject; returns (totals, replicate count)."""
    rows = list(raw)
    if not rows:
        raise InconsistentReplicatesError("no subjects")
    widths = {len(row) if hasattr(row, "__len__") else 1 for row in rows}
    if len(widths) != 1:
        raise InconsistentReplicatesError(
            f"replicate counts differ between subjects: {sorted(widths)}"
        )
    m = widths.pop()
    if m == 0:
        raise InconsistentReplicatesError("zero replicates per subject")
    matrix = np.asarray(rows)
    matrix = _as_counts(matrix.reshape(-1), "replicates").reshape(len(rows), m)
    return matrix.sum(axis=1), m
