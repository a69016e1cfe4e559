"""Empirical Bayes point estimation.

Maximum marginal likelihood for sigma at fixed M, the profile maximizer over
(sigma, M), and plug-in standard errors (sandwich primary, curvature
secondary).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics
from .likelihood import SIGMA_EPS, hess_sigma, log_eppf, score_sigma
from .numerics import log_gamma

INTERIOR = "Interior"
LOWER_SIGMA = "LowerSigma"
UPPER_SIGMA = "UpperSigma"
LOWER_M = "LowerM"
UPPER_M = "UpperM"

_ROOT_TOL = 1e-10
_M_TOL = 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EstimateResult:
    sigma_hat: float
    M_hat: float | None
    boundary: str
    score_at_opt: float
    log_lik: float
    se_sandwich: float | None = None
    se_curvature: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def interior(self):
        return self.boundary == INTERIOR

    def to_json(self, stats=None):
        out = {
            "sigma_hat": self.sigma_hat, "M_hat": self.M_hat,
            "boundary": self.boundary, "score_at_opt": self.score_at_opt,
            "log_lik": self.log_lik, "se_sandwich": self.se_sandwich,
            "se_curvature": self.se_curvature,
        }
        if stats is not None:
            out["n"] = stats.n
            out["K"] = stats.K
        return json.dumps(out, sort_keys=True)


def mle_sigma(stats, M, se=False):
    """Maximizer of sigma -> log_eppf(stats, sigma, M) on [eps, 1 - eps].

    The log likelihood is strictly concave, so the score has at most one sign
    change; when it has none the maximum sits at a boundary, which is
    reported via a flag instead of an exception (all-distinct samples push
    sigma to the upper boundary).
    """
    if stats.n < 2:
        raise ValueError("need n >= 2 observations")
    if M < 0.0:
        raise ValueError("M must be nonnegative")
    lo, hi = SIGMA_EPS, 1.0 - SIGMA_EPS
    f_lo = score_sigma(stats, lo, M)
    f_hi = score_sigma(stats, hi, M)
    if f_lo <= 0.0:
        sig, flag = lo, LOWER_SIGMA
    elif f_hi >= 0.0:
        sig, flag = hi, UPPER_SIGMA
    else:
        sig = _score_root(stats, M, lo, hi)
        flag = INTERIOR
    res = EstimateResult(
        sigma_hat=sig, M_hat=None, boundary=flag,
        score_at_opt=score_sigma(stats, sig, M),
        log_lik=log_eppf(stats, sig, M))
    if se and flag == INTERIOR:
        ses = sandwich_se(stats, sig)
        sec = 1.0 / math.sqrt(-hess_sigma(stats, sig, M))
        res = EstimateResult(
            sigma_hat=sig, M_hat=None, boundary=flag,
            score_at_opt=res.score_at_opt, log_lik=res.log_lik,
            se_sandwich=ses, se_curvature=sec)
    return res


def _score_root(stats, M, lo, hi):
    """Unique zero of the score by bisection-safeguarded Newton."""
    x = 0.5 * (lo + hi)
    for _ in range(200):
        val = score_sigma(stats, x, M)
        if val > 0.0:
            lo = x
        else:
            hi = x
        der = hess_sigma(stats, x, M)
        x_new = x - val / der
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= _ROOT_TOL:
            return x_new
        x = x_new
    return x


def profile_mle(stats, M_max=50.0, se=False):
    """Joint maximizer: sigma maximized at each M, then the profile
    M -> Lambda_n(sigma_hat(M), M) maximized over [0, M_max] by a coarse
    log-spaced grid plus golden-section refinement."""
    if stats.n < 2:
        raise ValueError("need n >= 2 observations")
    if M_max <= 0.0:
        raise ValueError("M_max must be positive")

    def profile(M):
        return log_eppf(stats, mle_sigma(stats, M).sigma_hat, M)

    grid = np.concatenate(([0.0], np.geomspace(0.01, M_max, 63)))
    values = np.array([profile(M) for M in grid])
    best = int(np.argmax(values))  # argmax takes the first (smallest M) tie
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best < grid.size - 1 else M_max
    M_hat = _golden_max(profile, lo, hi)
    boundary = INTERIOR
    if M_hat <= _M_TOL and profile(0.0) >= profile(M_hat):
        M_hat, boundary = 0.0, LOWER_M
    elif M_hat >= M_max - _M_TOL and profile(M_max) >= profile(M_hat):
        M_hat, boundary = M_max, UPPER_M
    inner = mle_sigma(stats, M_hat, se=se)
    if inner.boundary != INTERIOR:
        boundary = inner.boundary
    return EstimateResult(
        sigma_hat=inner.sigma_hat, M_hat=float(M_hat), boundary=boundary,
        score_at_opt=inner.score_at_opt, log_lik=inner.log_lik,
        se_sandwich=inner.se_sandwich, se_curvature=inner.se_curvature,
        diagnostics={"M_max": M_max})


def _golden_max(f, lo, hi, tol=_M_TOL):
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def plugin_alpha(stats, sigma_hat):
    """alpha_hat(n) = K_n / Gamma(1 - sigma_hat) (K_n/alpha0(n) tends to
    Gamma(1 - sigma0))."""
    return stats.K / math.exp(log_gamma(1.0 - sigma_hat))


def sandwich_se(stats, sigma_hat, alpha_n=None):
    """tau1 / (tau2^2 sqrt(alpha_n)) with the series constants evaluated at
    sigma_hat; alpha_n defaults to the K_n plug-in."""
    if not 0.0 < sigma_hat < 1.0:
        raise ValueError("sigma_hat must be interior")
    if alpha_n is None:
        alpha_n = plugin_alpha(stats, sigma_hat)
    # cache-friendly rounding: the constants are smooth in sigma and the
    # se is only meaningful to a few digits
    key = round(sigma_hat, 3)
    t1 = asymptotics.tau1_sq(key)
    t2 = asymptotics.tau2_sq(key)
    return math.sqrt(t1) / (t2 * math.sqrt(alpha_n))
