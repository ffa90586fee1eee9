"""Low-probability path pruning via a two-component Weibull mixture.

The batch's path probabilities are modeled as a mixture of a high and a low
Weibull component, fitted by deterministic EM under bounded weights.  Paths
are kept when their posterior of belonging to the high component reaches
0.5, or when they clear the batch mean (the truncated-mean guard, which also
makes the retained set provably non-empty).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, EmptyBatchError, FitDegenerateError

# Shape parameter clamp; outside this range the density is numerically a spike
# or uniform and the solver treats the data as degenerate.
SHAPE_MIN = 1e-3
SHAPE_MAX = 1e3

_EXP_CAP = 700.0  # exp argument cap to keep log-densities finite


@dataclass(frozen=True)
class WeibullParams:
    """Shape/scale pair, both strictly positive and finite."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise DomainError(f"shape must be positive and finite, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(f"scale must be positive and finite, got {self.scale}")

    def log_mean(self) -> float:
        """log of the distribution mean scale * Gamma(1 + 1/shape)."""
        return math.log(self.scale) + float(gammaln(1.0 + 1.0 / self.shape))

    def mean(self) -> float:
        try:
            return math.exp(self.log_mean())
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the mixture fit; defaults are the library's standard run."""

    weight_bounds: Tuple[float, float] = (0.2, 0.8)
    max_iter: int = 200
    tol: float = 1e-8
    mode: str = "length_normalized"

    def __post_init__(self):
        lo, hi = self.weight_bounds
        if not (0.0 < lo <= hi < 1.0):
            raise DomainError(f"weight bounds {self.weight_bounds} invalid")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


@dataclass(frozen=True)
class MixtureFit:
    """A fitted two-component Weibull mixture.

    ``high_index`` designates the component with the larger distribution
    mean (ties broken toward the larger scale); weights respect the
    configured bounds and sum to 1.
    """

    comp1: WeibullParams
    comp2: WeibullParams
    w1: float
    w2: float
    high_index: int
    loglik: float
    converged: bool
    n_iter: int = 0

    def __post_init__(self):
        if abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise DomainError(f"weights {self.w1}, {self.w2} do not sum to 1")
        if self.high_index not in (1, 2):
            raise DomainError("high_index must be 1 or 2")

    @property
    def high(self) -> WeibullParams:
        return self.comp1 if self.high_index == 1 else self.comp2

    @property
    def w_high(self) -> float:
        return self.w1 if self.high_index == 1 else self.w2

    def pdf(self, x):
        """Mixture density w1*f1 + w2*f2, vectorized over x > 0."""
        x = np.asarray(x, dtype=float)
        return self.w1 * _weibull_pdf_arr(x, self.comp1) + self.w2 * _weibull_pdf_arr(
            x, self.comp2
        )


@dataclass(frozen=True)
class PruningReport:
    """Which unique-path indices survived pruning, and why."""

    fit: Optional[MixtureFit]
    retained_indices: Tuple[int, ...]
    removed_indices: Tuple[int, ...]
    fallback_used: bool
    mean_threshold: float


def weibull_pdf(x: float, params: WeibullParams) -> float:
    """Density (k/lam) * (x/lam)^(k-1) * exp(-(x/lam)^k) for x > 0."""
    if x <= 0:
        raise DomainError(f"Weibull density requires x > 0, got {x}")
    return float(_weibull_pdf_arr(np.asarray([x], dtype=float), params)[0])


def _weibull_logpdf_arr(x: np.ndarray, params: WeibullParams) -> np.ndarray:
    k, lam = params.shape, params.scale
    log_ratio = np.log(x) - math.log(lam)
    z = np.exp(np.minimum(k * log_ratio, _EXP_CAP))
    return math.log(k) - math.log(lam) + (k - 1.0) * log_ratio - z


def _weibull_pdf_arr(x: np.ndarray, params: WeibullParams) -> np.ndarray:
    return np.exp(_weibull_logpdf_arr(x, params))


def _moment_init(x: np.ndarray) -> WeibullParams:
    """Method-of-moments starting point (Justus shape approximation)."""
    mean = float(np.mean(x))
    std = float(np.std(x))
    if std <= 0 or mean <= 0:
        return WeibullParams(shape=1.0, scale=max(mean, 1e-12))
    cv = std / mean
    k = min(max(cv**-1.086, 0.05), 100.0)
    lam = mean / math.exp(float(gammaln(1.0 + 1.0 / k)))
    return WeibullParams(shape=k, scale=lam)


class _ShapeWorkspace:
    """Precomputed per-dataset arrays shared by every M-step solve.

    The shifted power sums S0 = sum r x^k, S1 = sum r x^k ln x and S2 (with
    ln^2) share a common factor exp(k * max(ln x)) which cancels in every
    ratio the solver uses; the shift keeps x^k from underflowing for small
    x and large k.  All three sums come from a single matrix product.
    """

    def __init__(self, log_x: np.ndarray):
        self.log_x = log_x
        self.shift = float(np.max(log_x))
        self.centered = log_x - self.shift
        self.powers = np.stack(
            [np.ones_like(log_x), log_x, log_x * log_x], axis=1
        )

    def stats(self, k: float, r: np.ndarray):
        w = r * np.exp(k * self.centered)
        s0, s1, s2 = w @ self.powers
        return float(s0), float(s1), float(s2)


def _weighted_mle(
    r: np.ndarray, r_sum: float, ws: _ShapeWorkspace, k_start: float
) -> WeibullParams:
    """Weighted Weibull MLE: shape from safeguarded root-finding, scale closed.

    The shape solves g(k) = S1/S0 - 1/k - mean_r(ln x) = 0, which is
    strictly increasing in k, so a Newton iteration safeguarded by a
    sign-change bracket converges to the unique root; data with no weighted
    spread push the root to a clamp.  Warm-started from the previous
    sweep's shape, the solve usually exits after one evaluation once EM has
    settled.  The scale is then lam = (S0 / sum r)^(1/k), reusing the power
    sums from the final shape evaluation.
    """
    t = float(r @ ws.log_x) / r_sum
    lo, hi = SHAPE_MIN, SHAPE_MAX
    k = min(max(k_start, lo), hi)
    s0 = 0.0
    k_eval = k
    for _ in range(60):
        k_eval = k
        s0, s1, s2 = ws.stats(k, r)
        if s0 <= 0.0:
            g, slope = -1.0, 1.0 / (k * k)
        else:
            ratio = s1 / s0
            g = ratio - 1.0 / k - t
            slope = (s2 / s0 - ratio * ratio) + 1.0 / (k * k)
        if abs(g) < 1e-12:
            break
        if g > 0.0:
            hi = k
        else:
            lo = k
        step = g / slope if slope > 0 else 0.0
        k_new = k - step
        if not (lo < k_new < hi):
            k_new = 0.5 * (lo + hi)
        if abs(k_new - k) < 1e-12 * k:
            break
        k = k_new
    if k != k_eval:
        s0 = ws.stats(k, r)[0]
    if s0 <= 0.0:
        scale = math.exp(ws.shift)
    else:
        scale = math.exp(ws.shift + math.log(s0 / r_sum) / k)
    return WeibullParams(shape=k, scale=scale)


def fit_mixture(probs: Sequence[float], config: FitConfig = FitConfig()) -> MixtureFit:
    """Bounded-weight maximum-likelihood fit of the two-Weibull mixture.

    Deterministic EM: responsibilities in the E-step, per-component weighted
    Weibull MLE in the M-step (shape from safeguarded root-finding, scale in
    closed form), weights clamped to ``config.weight_bounds``.  Starts from
    a fixed median-split moment initialization, runs at most
    ``config.max_iter`` sweeps, and stops once the log-likelihood moves less
    than ``config.tol``.

    Raises FitDegenerateError when fewer than 4 points or fewer than 2
    distinct values are supplied; callers fall back to mean-only pruning.
    """
    x = np.asarray(list(probs), dtype=float)
    if x.size < 4:
        raise FitDegenerateError(f"need at least 4 data points, got {x.size}")
    if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
        raise DomainError("mixture data must be positive and finite")
    if np.unique(x).size < 2:
        raise FitDegenerateError("mixture data has no spread")

    log_x = np.log(x)
    ws = _ShapeWorkspace(log_x)
    lo_w, hi_w = config.weight_bounds

    def log_joint(w1: float, comp1: WeibullParams, comp2: WeibullParams):
        # log(w f(x)) = log w + log k - k log lam + (k-1) ln x - (x/lam)^k
        out = []
        for w, comp in ((w1, comp1), (1.0 - w1, comp2)):
            k, log_lam = comp.shape, math.log(comp.scale)
            z = np.exp(np.minimum(k * (log_x - log_lam), _EXP_CAP))
            const = math.log(w) + math.log(k) - k * log_lam
            out.append(const + (k - 1.0) * log_x - z)
        return out

    order = np.argsort(x, kind="stable")
    half = x.size // 2
    comp1 = _moment_init(x[order[:half]])
    comp2 = _moment_init(x[order[half:]])
    w1 = 0.5

    loglik = -math.inf
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        l1, l2 = log_joint(w1, comp1, comp2)
        norm = np.logaddexp(l1, l2)
        new_loglik = float(np.sum(norm))

        r1 = np.exp(l1 - norm)
        if np.isnan(r1).any():
            r1 = np.where(np.isnan(r1), 0.5, r1)
        r2 = 1.0 - r1

        r1_sum = float(np.sum(r1))
        r2_sum = x.size - r1_sum
        w1 = min(max(r1_sum / x.size, lo_w), hi_w)

        if r1_sum > 1e-12:
            comp1 = _weighted_mle(r1, r1_sum, ws, comp1.shape)
        if r2_sum > 1e-12:
            comp2 = _weighted_mle(r2, r2_sum, ws, comp2.shape)

        if abs(new_loglik - loglik) < config.tol:
            loglik = new_loglik
            converged = True
            break
        loglik = new_loglik

    l1, l2 = log_joint(w1, comp1, comp2)
    loglik = float(np.sum(np.logaddexp(l1, l2)))

    lm1, lm2 = comp1.log_mean(), comp2.log_mean()
    if lm1 > lm2:
        high = 1
    elif lm2 > lm1:
        high = 2
    else:
        high = 1 if comp1.scale >= comp2.scale else 2

    return MixtureFit(
        comp1=comp1,
        comp2=comp2,
        w1=w1,
        w2=1.0 - w1,
        high_index=high,
        loglik=loglik,
        converged=converged,
        n_iter=iterations,
    )


def mixture_loglik(probs: Sequence[float], fit: MixtureFit) -> float:
    """Log-likelihood of data under an already-specified mixture."""
    x = np.asarray(list(probs), dtype=float)
    l1 = math.log(fit.w1) + _weibull_logpdf_arr(x, fit.comp1)
    l2 = math.log(fit.w2) + _weibull_logpdf_arr(x, fit.comp2)
    return float(np.sum(np.logaddexp(l1, l2)))


def _p_high_arr(x: np.ndarray, fit: MixtureFit) -> np.ndarray:
    l1 = math.log(fit.w1) + _weibull_logpdf_arr(x, fit.comp1)
    l2 = math.log(fit.w2) + _weibull_logpdf_arr(x, fit.comp2)
    l_high = l1 if fit.high_index == 1 else l2
    shift = np.maximum(l1, l2)
    with np.errstate(invalid="ignore"):
        post = np.exp(l_high - shift) / (np.exp(l1 - shift) + np.exp(l2 - shift))
    # Both densities underflowed: classify by position against the high mean.
    dead = ~np.isfinite(post)
    if np.any(dead):
        post = np.where(dead, (x >= fit.high.mean()).astype(float), post)
    return post


def p_high(x: float, fit: MixtureFit) -> float:
    """Posterior probability that x was generated by the high component.

    Evaluates w_h f_h(x) / (w1 f1(x) + w2 f2(x)); when the denominator
    underflows to zero the value is 1 for x at or above the high
    component's mean and 0 below it.
    """
    if x <= 0:
        raise DomainError(f"p_high requires x > 0, got {x}")
    return float(_p_high_arr(np.asarray([x], dtype=float), fit)[0])


def prune(
    probs: Sequence[float], config: FitConfig = FitConfig()
) -> PruningReport:
    """Split unique-path probabilities into retained and removed index sets.

    Retained = {i : p_high(p_i) >= 0.5} union {i : p_i >= mean(p)}.  When
    the mixture fit is degenerate only the mean rule applies.  The maximum
    element always clears the mean, so the retained set is never empty.
    """
    x = [float(p) for p in probs]
    if len(x) == 0:
        raise EmptyBatchError("cannot prune an empty path set")
    # The true mean never exceeds the max; clamping shields the non-empty
    # retention guarantee from summation rounding on near-constant data.
    mean = min(math.fsum(x) / len(x), max(x))

    fit: Optional[MixtureFit] = None
    fallback = False
    try:
        fit = fit_mixture(x, config)
    except FitDegenerateError:
        fallback = True

    if fit is not None:
        posteriors = _p_high_arr(np.asarray(x, dtype=float), fit)
        keep = [p >= mean or post >= 0.5 for p, post in zip(x, posteriors)]
    else:
        keep = [p >= mean for p in x]

    retained = tuple(i for i, k in enumerate(keep) if k)
    removed = tuple(i for i, k in enumerate(keep) if not k)
    return PruningReport(
        fit=fit,
        retained_indices=retained,
        removed_indices=removed,
        fallback_used=fallback,
        mean_threshold=mean,
    )
