"""Marginal likelihood surface of the two-parameter model.

Log-EPPF in occupancy-count form (O(n) per evaluation), its first and second
derivatives in sigma, and the h correction term used by the profile analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_EPS = 1e-9


@dataclass(frozen=True)
class PYParams:
    sigma: float
    M: float

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if self.M < 0.0:
            raise ValueError("M must be nonnegative")


def _coerce(params, M):
    if isinstance(params, PYParams):
        return params.sigma, params.M
    return float(params), float(M)


def log_eppf(stats, params, M=None):
    """Log marginal likelihood of the tie pattern under PY(sigma, M).

    Lambda_n(sigma, M) = sum_{l=1}^{K-1} ln(M + l sigma)
                       + sum_{l=1}^{max(N)-1} Z_{l+1} ln(l - sigma)
                       - sum_{i=1}^{n-1} ln(M + i).

    sigma outside [SIGMA_EPS, 1 - SIGMA_EPS] returns -inf (boundary clamp);
    sigma -> 1 with a tie present also drives the value to -inf.
    """
    sigma, M = _coerce(params, M)
    if M < 0.0:
        raise ValueError("M must be nonnegative")
    if not SIGMA_EPS <= sigma <= 1.0 - SIGMA_EPS:
        return -np.inf
    if M == 0.0 and sigma <= 0.0:
        raise ValueError("need M + sigma > 0")
    n, K = stats.n, stats.K
    l_new = np.arange(1, K, dtype=float)
    out = float(np.sum(np.log(M + l_new * sigma)))
    if stats.Z.size > 1:
        l_old = np.arange(1, stats.Z.size, dtype=float)
        out += float(np.sum(stats.Z[1:] * np.log(l_old - sigma)))
    out -= float(np.sum(np.log(M + np.arange(1, n, dtype=float))))
    return out


_GRID_TAIL_START = 256  # exact below, sigma/l power series above


def log_eppf_grid(stats, sigmas, M):
    """Vectorized log_eppf over an array of sigma values at fixed M.

    The occupancy sum sum_l Z_{l+1} ln(l - sigma) is evaluated exactly for
    l < 256 and via ln(l - sigma) = ln l - sum_p sigma^p/(p l^p) (p <= 4)
    beyond, which caps the truncation error near 1e-7 log-units while making
    the cost per node independent of the largest multiplicity.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    out = np.full(sigmas.shape, -np.inf)
    ok = (sigmas >= SIGMA_EPS) & (sigmas <= 1.0 - SIGMA_EPS)
    if not np.any(ok):
        return out
    s = sigmas[ok]
    n, K = stats.n, stats.K
    val = np.zeros(s.size)
    if K > 1:
        l_new = np.arange(1, K, dtype=float)
        val += np.sum(np.log(M + np.outer(s, l_new)), axis=1)
    cut = min(stats.Z.size, _GRID_TAIL_START)
    if cut > 1:
        l_old = np.arange(1, cut, dtype=float)
        z = stats.Z[1:cut].astype(float)
        val += np.log(l_old[None, :] - s[:, None]) @ z
    if stats.Z.size > cut:
        l_tail = np.arange(cut, stats.Z.size, dtype=float)
        z_tail = stats.Z[cut:].astype(float)
        val += float(np.sum(z_tail * np.log(l_tail)))
        for p in range(1, 5):
            val -= s ** p / p * float(np.sum(z_tail / l_tail ** p))
    val -= float(np.sum(np.log(M + np.arange(1, n, dtype=float))))
    out[ok] = val
    return out


def score_sigma(stats, params, M=None):
    """d/d sigma of log_eppf:
    sum_{l<K} l/(M + l sigma) - sum_l Z_{l+1}/(l - sigma)."""
    sigma, M = _coerce(params, M)
    l_new = np.arange(1, stats.K, dtype=float)
    out = float(np.sum(l_new / (M + l_new * sigma)))
    if stats.Z.size > 1:
        l_old = np.arange(1, stats.Z.size, dtype=float)
        out -= float(np.sum(stats.Z[1:] / (l_old - sigma)))
    return out


def hess_sigma(stats, params, M=None):
    """Second sigma-derivative; strictly negative for n >= 2."""
    sigma, M = _coerce(params, M)
    l_new = np.arange(1, stats.K, dtype=float)
    out = -float(np.sum((l_new / (M + l_new * sigma)) ** 2))
    if stats.Z.size > 1:
        l_old = np.arange(1, stats.Z.size, dtype=float)
        out -= float(np.sum(stats.Z[1:] / (l_old - sigma) ** 2))
    return out


def occupied_sum(stats, sigma):
    """G_n(sigma) = sum_l Z_{l+1}/(l - sigma)."""
    if stats.Z.size <= 1:
        return 0.0
    l_old = np.arange(1, stats.Z.size, dtype=float)
    return float(np.sum(stats.Z[1:] / (l_old - sigma)))


def eppf_total_mass(n, sigma, M):
    """Sum of exp(log_eppf) over all set partitions of {1..n} (must be 1).

    Enumerates integer partitions of n; each block-size multiset lambda
    corresponds to n! / (prod_j N_j! * prod_m mult_m!) set partitions.
    """
    from math import factorial

    from .partition import from_sizes

    if n < 1:
        raise ValueError("n must be positive")
    total = 0.0
    for sizes in _integer_partitions(n):
        count = factorial(n)
        mult = {}
        for s in sizes:
            count //= factorial(s)
            mult[s] = mult.get(s, 0) + 1
        for m in mult.values():
            count //= factorial(m)
        total += count * np.exp(log_eppf(from_sizes(sizes), sigma, M))
    return total


def _integer_partitions(n, cap=None):
    """Yield integer partitions of n as nonincreasing tuples."""
    cap = n if cap is None else cap
    if n == 0:
        yield ()
        return
    for first in range(min(n, cap), 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest


def h_precision(k, sigma, M):
    """h_{sigma,M}(k) = 1 + sum_{l=1}^{k-1} M/(M + l sigma)."""
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    if M < 0.0:
        raise ValueError("M must be nonnegative")
    k = int(k)
    if k < 1:
        raise ValueError("k must be positive")
    if M == 0.0 or k == 1:
        return 1.0
    l = np.arange(1, k, dtype=float)
    return 1.0 + float(np.sum(M / (M + l * sigma)))
