"""Shared numerical kernels: special functions, series evaluation, quadrature.

Everything in this module is a pure function of its arguments and safe to call
from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class SeriesTolerance:
    """Truncation control for infinite series."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_terms: int = 10_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOLERANCE = SeriesTolerance()


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma requires x > 0")
    out = special.gammaln(x)
    return float(out) if out.ndim == 0 else out


def log_ascending_factorial(a, n):
    """ln a^[n] = ln a(a+1)...(a+n-1), with a^[0] = 1.

    Direct summation for short products, gammaln difference otherwise.
    """
    if a <= 0:
        raise ValueError("log_ascending_factorial requires a > 0")
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0
    if n <= 32:
        return float(np.sum(np.log(a + np.arange(n))))
    return float(special.gammaln(a + n) - special.gammaln(a))


def g_sigma(m, sigma):
    """g_sigma(m) = sum_{l=1}^{m-1} 1/(l - sigma), with g(0) = g(1) = 0."""
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    m = int(m)
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m <= 1:
        return 0.0
    if m <= 4096:
        return float(np.sum(1.0 / (np.arange(1, m) - sigma)))
    # psi(m - sigma) - psi(1 - sigma) telescopes to the same sum.
    return float(special.digamma(m - sigma) - special.digamma(1.0 - sigma))


def g_sigma_values(m, sigma):
    """Vectorized g_sigma over an integer array (digamma form)."""
    m = np.asarray(m)
    out = np.zeros(m.shape, dtype=float)
    big = m >= 2
    out[big] = special.digamma(m[big] - sigma) - special.digamma(1.0 - sigma)
    return out


def poisson_weighted_reciprocal(s, sigma, tol=DEFAULT_TOLERANCE):
    """T(s, sigma) = e^{-s} sum_{m>=1} s^m / (m! (m - sigma)).

    Equals E[1/(X - sigma); X >= 1] for X ~ Poisson(s).  Terms are summed as
    Poisson probability masses so large s cannot overflow.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    if s == 0.0:
        return 0.0
    m_max = int(min(tol.max_terms, math.ceil(s + 10.0 * math.sqrt(s) + 50.0)))
    m = np.arange(1, m_max + 1, dtype=float)
    log_pmf = m * math.log(s) - s - special.gammaln(m + 1.0)
    return float(np.sum(np.exp(log_pmf) / (m - sigma)))


def log_sum_exp(values):
    """ln sum_i exp(v_i), stable under shift by the maximum."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    vmax = np.max(v)
    if not np.isfinite(vmax):
        # all -inf stays -inf; +inf / nan propagate
        return float(vmax)
    return float(vmax + math.log(np.sum(np.exp(v - vmax))))


# 15-point Gauss-Kronrod nodes on [-1, 1]; the odd-indexed nodes form the
# embedded 7-point Gauss rule used for the error estimate.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_G_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _gk_panel(f, a, b):
    """Kronrod estimate and |K15 - G7| error estimate on one panel."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _GK_NODES
    y = np.asarray([f(xi) for xi in x], dtype=float)
    k15 = half * float(np.dot(_GK_WEIGHTS, y))
    g7 = half * float(np.dot(_G_WEIGHTS, y[1::2]))
    return k15, abs(k15 - g7)


def adaptive_integrate(f, a, b, rel_tol=1e-10, max_panels=4096,
                       endpoint_levels=52):
    """Integrate f over (a, b] by adaptive 15-point Gauss-Kronrod panels.

    The initial partition refines geometrically toward the left endpoint so
    that integrable power singularities s^{-gamma} at a are resolved; adaptive
    bisection then drives the summed |K15 - G7| estimates below
    rel_tol * |integral|.
    """
    if not b > a:
        raise ValueError("requires a < b")
    # geometric seed panels accumulating toward a
    width = b - a
    cuts = [b]
    frac = 0.5
    for _ in range(endpoint_levels):
        frac *= 0.5
        cuts.append(a + width * frac)
    cuts.append(a)  # GK nodes are interior, so f(a) itself is never evaluated
    panels = []
    hi = cuts[0]
    for lo in cuts[1:]:
        panels.append(_gk_panel(f, lo, hi) + (lo, hi))
        hi = lo
    total = sum(p[0] for p in panels)
    for _ in range(max_panels):
        err = sum(p[1] for p in panels)
        scale = max(abs(total), 1e-300)
        if err <= rel_tol * scale:
            return total
        worst = max(range(len(panels)), key=lambda i: panels[i][1])
        _, _, lo, hi = panels[worst]
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # panel at floating-point resolution
        left = _gk_panel(f, lo, mid) + (lo, mid)
        right = _gk_panel(f, mid, hi) + (mid, hi)
        panels[worst] = left
        panels.append(right)
        total = sum(p[0] for p in panels)
    err = sum(p[1] for p in panels)
    if err <= rel_tol * max(abs(total), 1e-300):
        return total
    raise IntegrationError(
        f"quadrature did not converge: estimate {total}, error bound {err}",
        estimate=total, error_bound=err)
