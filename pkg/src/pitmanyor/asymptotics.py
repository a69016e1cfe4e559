"""Limit theory as computable objects.

Centering function E0n and its root sigma0n, the limiting function E0 and its
negated slope tau2_sq, the sandwich numerator tau1_sq, and the precision-limit
pair (K0, M0).  Slow series (terms ~ m^{-1-sigma0} log m) are truncated with
analytic Hurwitz-zeta tail corrections rather than brute force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .numerics import DEFAULT_TOLERANCE, g_sigma_values, log_gamma

# ---------------------------------------------------------------------------
# tail helpers


def _hurwitz(s, a):
    return float(special.zeta(s, a))


def _hurwitz_log(s, a, step=1e-5):
    """sum_{m >= a} m^{-s} log m = -d/ds zeta(s, a), by central difference."""
    return float((special.zeta(s - step, a) - special.zeta(s + step, a))
                 / (2.0 * step))


# ---------------------------------------------------------------------------
# limiting function E0 and tau2


def E0_series(sigma, sigma0, tol=DEFAULT_TOLERANCE, m_star=100_000):
    """E0(sigma) = Gamma(1-sigma0)/sigma - sum_m Gamma(m+1-sigma0)/(m!(m-sigma)).

    Head summed directly to m_star; the tail uses the Stirling-ratio expansion
    Gamma(m+1-sigma0)/m! = m^{-sigma0}(1 - sigma0(1-sigma0)/(2m) + O(m^-2)),
    giving Hurwitz-zeta corrections accurate to ~m_star^{-1-sigma0}.
    """
    if not 0.0 < sigma < 1.0 or not 0.0 < sigma0 < 1.0:
        raise ValueError("sigma and sigma0 must lie in (0, 1)")
    m = np.arange(1, m_star + 1, dtype=float)
    ratio = np.exp(special.gammaln(m + 1.0 - sigma0) - special.gammaln(m + 1.0))
    head = float(np.sum(ratio / (m - sigma)))
    a = m_star + 1
    tail = _hurwitz(1.0 + sigma0, a) \
        + (sigma - sigma0 * (1.0 - sigma0) / 2.0) * _hurwitz(2.0 + sigma0, a)
    return math.exp(log_gamma(1.0 - sigma0)) / sigma - head - tail


def gamma_ratio_sum(gamma, m_star=100_000):
    """sum_m Gamma(m-gamma)/m!  (equals Gamma(1-gamma)/gamma)."""
    m = np.arange(1, m_star + 1, dtype=float)
    head = float(np.sum(np.exp(special.gammaln(m - gamma)
                               - special.gammaln(m + 1.0))))
    a = m_star + 1
    # Gamma(m-gamma)/m! = m^{-1-gamma}(1 + gamma(1+gamma)/(2m) + O(m^-2))
    tail = _hurwitz(1.0 + gamma, a) \
        + gamma * (1.0 + gamma) / 2.0 * _hurwitz(2.0 + gamma, a)
    return head + tail


@lru_cache(maxsize=256)
def tau2_sq(sigma0, m_star=100_000):
    """-E0'(sigma0) = Gamma(1-sigma0)/sigma0^2
    + sum_m Gamma(m+1-sigma0)/(m!(m-sigma0)^2)."""
    if not 0.0 < sigma0 < 1.0:
        raise ValueError("sigma0 must lie in (0, 1)")
    m = np.arange(1, m_star + 1, dtype=float)
    ratio = np.exp(special.gammaln(m + 1.0 - sigma0) - special.gammaln(m + 1.0))
    head = float(np.sum(ratio / (m - sigma0) ** 2))
    a = m_star + 1
    tail = _hurwitz(2.0 + sigma0, a) \
        + (2.0 * sigma0 - sigma0 * (1.0 - sigma0) / 2.0) \
        * _hurwitz(3.0 + sigma0, a)
    out = math.exp(log_gamma(1.0 - sigma0)) / sigma0 ** 2 + head + tail
    if out <= 0.0:
        raise ArithmeticError("tau2_sq must be positive")
    return out


# ---------------------------------------------------------------------------
# tau1 (sandwich numerator)


def _tau1_component2(sigma0, m_star=1_000_000):
    """sum_m Gamma(m-sigma0)(g(m+1)+g(m))/m! with log-corrected zeta tail."""
    m = np.arange(1, m_star + 1, dtype=float)
    ratio = np.exp(special.gammaln(m - sigma0) - special.gammaln(m + 1.0))
    g = g_sigma_values(np.arange(0, m_star + 2), sigma0)
    head = float(np.sum(ratio * (g[2:m_star + 2] + g[1:m_star + 1])))
    # tail term ~ m^{-1-sigma0} (2 log m + A) with A = -2 psi(1 - sigma0)
    a = m_star + 1
    A = -2.0 * float(special.digamma(1.0 - sigma0))
    tail = 2.0 * _hurwitz_log(1.0 + sigma0, a) + A * _hurwitz(1.0 + sigma0, a)
    return head + tail


def _tau1_component4(sigma0, m_max=400):
    """sum_{m>=2} g(m) Gamma(m-sigma0)/(m! 2^{m-sigma0-1}) (geometric decay)."""
    m = np.arange(2, m_max + 1, dtype=float)
    logs = special.gammaln(m - sigma0) - special.gammaln(m + 1.0) \
        - (m - sigma0 - 1.0) * math.log(2.0)
    g = g_sigma_values(np.arange(2, m_max + 1), sigma0)
    return float(np.sum(np.exp(logs) * g))


def _tau1_component3(sigma0, n_star=10_000, fit_decade=10.0):
    """Double series sum_{k>=2} sum_{m>=1} g(k) Gamma(k+m+1-sigma0)
    / (k! m! 2^{k+m-sigma0} (m-sigma0)), summed along diagonals N = k+m.

    Diagonal sums decay like (a + b log N) N^{-1-sigma0}; a and b are fitted
    on the last decade of computed diagonals and the tail beyond n_star is
    integrated analytically via Hurwitz zeta values.
    """
    lg = special.gammaln(np.arange(1, n_star + 2, dtype=float))  # lg[i]=ln(i!)
    g = g_sigma_values(np.arange(0, n_star + 1), sigma0)
    diag = np.zeros(n_star + 1)
    for N in range(3, n_star + 1):
        k = np.arange(2, N, dtype=float)
        m = N - k
        log_pref = special.gammaln(N + 1.0 - sigma0) \
            - (N - sigma0) * math.log(2.0)
        terms = np.exp(log_pref - lg[2:N] - lg[N - 2:0:-1])
        diag[N] = float(np.sum(terms * g[2:N] / (m - sigma0)))
    total = float(np.sum(diag))
    # tail fit on the last decade: d_N * N^{1+sigma0} ~ a + b log N
    lo = int(n_star / fit_decade)
    N_fit = np.arange(lo, n_star + 1, dtype=float)
    y = diag[lo:] * N_fit ** (1.0 + sigma0)
    X = np.column_stack([np.ones_like(N_fit), np.log(N_fit)])
    (a_fit, b_fit), *_ = np.linalg.lstsq(X, y, rcond=None)
    start = n_star + 1
    tail = a_fit * _hurwitz(1.0 + sigma0, start) \
        + b_fit * _hurwitz_log(1.0 + sigma0, start)
    return total + tail


@lru_cache(maxsize=64)
def tau1_sq(sigma0, n_star=10_000):
    """Limit variance of the normalized score (sandwich numerator)."""
    if not 0.0 < sigma0 < 1.0:
        raise ValueError("sigma0 must lie in (0, 1)")
    c1 = (2.0 ** sigma0 - 1.0) * math.exp(log_gamma(1.0 - sigma0)) \
        / sigma0 ** 2
    c2 = _tau1_component2(sigma0)
    c3 = _tau1_component3(sigma0, n_star=n_star)
    c4 = _tau1_component4(sigma0)
    out = c1 + c2 - c3 - c4
    if out <= 0.0:
        raise ArithmeticError(
            f"tau1_sq came out nonpositive ({out}); series bug")
    return out


def tau1_components(sigma0):
    """The four summands of tau1_sq, for diagnostics."""
    return (
        (2.0 ** sigma0 - 1.0) * math.exp(log_gamma(1.0 - sigma0)) / sigma0 ** 2,
        _tau1_component2(sigma0),
        _tau1_component3(sigma0),
        _tau1_component4(sigma0),
    )


# ---------------------------------------------------------------------------
# finite-n centering function E0n and its root


_TAIL_CUT = 1e-4  # atoms with n p_j below this are folded into moment tails
# (the tail uses the cubic expansion of (1-e^-l)/sigma - E g; the neglected
# O(l^4) mass is ~1e-12 of the total at this cutoff)
_TIERS = [(1e-2, 9), (1e-1, 13), (0.5, 19), (2.0, 31), (8.0, 56), (30.0, 112)]
_LARGE_LAM = 200.0


def _expected_g_large(lam, sigma, with_derivative):
    """E g_sigma(Poisson(lam)) for large lam by a moment expansion around
    the mean: E f(X) = f(l) + m2/2 f'' + m3/6 f''' + m4/24 f'''' + O(l^-4)
    with f(x) = psi(x - sigma) - psi(1 - sigma) and Poisson central moments
    m2 = m3 = l, m4 = 3l^2 + l.  (The x = 0 atom, where the smooth extension
    disagrees with g, carries mass e^-lam < 1e-80 here.)"""
    x = lam - sigma
    m4 = 3.0 * lam ** 2 + lam
    val = special.digamma(x) - special.digamma(1.0 - sigma) \
        + lam / 2.0 * special.polygamma(2, x) \
        + lam / 6.0 * special.polygamma(3, x) \
        + m4 / 24.0 * special.polygamma(4, x)
    total = float(np.sum(val))
    if not with_derivative:
        return total, 0.0
    der = -special.polygamma(1, x) + special.polygamma(1, 1.0 - sigma) \
        - lam / 2.0 * special.polygamma(3, x) \
        - lam / 6.0 * special.polygamma(4, x) \
        - m4 / 24.0 * special.polygamma(5, x)
    return total, float(np.sum(der))


def _expected_g_sums(lam, sigma, with_derivative=False):
    """sum over atoms of E g_sigma(X_j) for X_j ~ Poisson(lam_j), and
    optionally of its sigma-derivative sum_l P(X_j >= l+1)/(l-sigma)^2.

    Uses E g(X) = sum_{l>=1} P(X >= l+1)/(l-sigma) with the survival
    probabilities advanced by the Poisson pmf recursion, vectorized per
    intensity tier (lam must be sorted ascending).
    """
    split = int(np.searchsorted(lam, _LARGE_LAM, side="right"))
    total, total_d = _expected_g_large(lam[split:], sigma, with_derivative)
    lam = lam[:split]
    tiers = list(_TIERS)
    hi_max = float(lam[-1]) if lam.size else 0.0
    b = 30.0
    while b < hi_max:
        b *= 2.0
        tiers.append((b, int(b + 12.0 * math.sqrt(b) + 60.0)))
    start = 0
    for bound, m_max in tiers:
        stop = int(np.searchsorted(lam, bound, side="right"))
        if stop > start:
            chunk = lam[start:stop]
            pmf = np.exp(-chunk)  # P(X = 0)
            surv = 1.0 - pmf      # P(X >= 1)
            acc = np.zeros_like(chunk)
            acc_d = np.zeros_like(chunk) if with_derivative else None
            for l in range(1, m_max + 1):
                pmf = pmf * chunk / l
                surv = np.maximum(surv - pmf, 0.0)  # now P(X >= l+1)
                acc += surv / (l - sigma)
                if with_derivative:
                    acc_d += surv / (l - sigma) ** 2
            total += float(np.sum(acc))
            if with_derivative:
                total_d += float(np.sum(acc_d))
            start = stop
        if start == lam.size:
            break
    return (total, total_d) if with_derivative else total


class E0nEvaluator:
    """E0n(sigma) = sum_j [(1 - e^{-n p_j})/sigma - E g_sigma(Poisson(n p_j))].

    This is the exact atom-by-atom form of the integral
    int_0^n alpha0(n/s) e^{-s} (1/sigma - sum_m s^m/(m!(m-sigma))) ds:
    integrating the counting-function step heights term by term reproduces
    the sum above.  Atom intensities are cached so root finding reuses them.
    """

    def __init__(self, pop, n, tail_cut=_TAIL_CUT):
        self.pop = pop
        self.n = int(n)
        limit = pop.n_atoms()
        size = 1 << 10
        while True:
            if limit is not None:
                size = min(size, limit)
            probs = pop.atom_probs(size)
            if (limit is not None and size == limit) \
                    or n * probs[-1] < tail_cut:
                break
            size *= 2
        lam = n * probs
        explicit = int(np.searchsorted(-lam, -tail_cut, side="right"))
        self.lam = lam[:explicit][::-1].copy()  # ascending for tier sweeps
        extra = lam[explicit:]
        if limit is not None and size == limit:
            t1 = t2 = t3 = 0.0
        else:
            t1 = n * pop.tail_power_sum(size, 1)
            t2 = n ** 2 * pop.tail_power_sum(size, 2)
            t3 = n ** 3 * pop.tail_power_sum(size, 3)
        self.t1 = float(np.sum(extra)) + t1
        self.t2 = float(np.sum(extra ** 2)) + t2
        self.t3 = float(np.sum(extra ** 3)) + t3
        self.occupied = float(np.sum(-np.expm1(-self.lam)))

    def _tail_value(self, sigma):
        # tail atoms: (1 - e^-l)/sigma - E g  to third order in l
        return (self.t1 - self.t2 / 2.0 + self.t3 / 6.0) / sigma \
            - (self.t2 / 2.0 - self.t3 / 3.0) / (1.0 - sigma) \
            - self.t3 / 6.0 / (2.0 - sigma)

    def _tail_derivative(self, sigma):
        return -(self.t1 - self.t2 / 2.0 + self.t3 / 6.0) / sigma ** 2 \
            - (self.t2 / 2.0 - self.t3 / 3.0) / (1.0 - sigma) ** 2 \
            - self.t3 / 6.0 / (2.0 - sigma) ** 2

    def value(self, sigma):
        if not 0.0 < sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        return self.occupied / sigma - _expected_g_sums(self.lam, sigma) \
            + self._tail_value(sigma)

    def derivative(self, sigma):
        """Analytic d/dsigma of value (all denominators squared)."""
        _, d = _expected_g_sums(self.lam, sigma, with_derivative=True)
        return -self.occupied / sigma ** 2 - d + self._tail_derivative(sigma)

    def value_and_derivative(self, sigma):
        """Both in one sweep over the atoms (for Newton root finding)."""
        if not 0.0 < sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        eg, eg_d = _expected_g_sums(self.lam, sigma, with_derivative=True)
        val = self.occupied / sigma - eg + self._tail_value(sigma)
        der = -self.occupied / sigma ** 2 - eg_d + self._tail_derivative(sigma)
        return val, der


_EVALUATOR_CACHE = {}


def _evaluator(pop, n):
    key = (id(pop), int(n))
    ev = _EVALUATOR_CACHE.get(key)
    if ev is None or ev.pop is not pop:
        ev = E0nEvaluator(pop, n)
        _EVALUATOR_CACHE[key] = ev
    return ev


def E0n(pop, n, sigma):
    """The finite-n centering function of Eq.-(4) type, exact atom sum."""
    return _evaluator(pop, n).value(sigma)


def E0n_derivative(pop, n, sigma):
    return _evaluator(pop, n).derivative(sigma)


def sigma0n_root(pop, n, bracket=(0.01, 0.99), tol=1e-8):
    """The unique zero of sigma -> E0n(pop, n, sigma) (strictly decreasing).

    Safeguarded Newton: the analytic derivative gives quadratic convergence
    while the sign bracket shrinks as a fallback.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    ev = _evaluator(pop, n)
    lo, hi = bracket
    f_lo, f_hi = ev.value(lo), ev.value(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ValueError(
            f"root not bracketed on [{lo}, {hi}]: "
            f"E0n({lo})={f_lo:.3g}, E0n({hi})={f_hi:.3g}")
    x = 0.5 * (lo + hi)
    for _ in range(80):
        val, der = ev.value_and_derivative(x)
        if val > 0.0:
            lo = x
        else:
            hi = x
        step = val / der
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol:
            return float(x_new)
        x = x_new
    raise RuntimeError("sigma0n root iteration failed to converge")


# ---------------------------------------------------------------------------
# precision limit (K0, M0)


def precision_objective(M, sigma0, K0):
    """f(M) = (M/sigma0)(K0 + ln Gamma(1-sigma0)) + ln Gamma(1+M)
    - ln Gamma(1+M/sigma0); concave in M."""
    return (M / sigma0) * (K0 + log_gamma(1.0 - sigma0)) \
        + log_gamma(1.0 + M) - log_gamma(1.0 + M / sigma0)


def precision_limit(sigma0, rv, M_max):
    """(K0, M0) for a population with regular-variation descriptor rv.

    K0 is classified symbolically from the L0 family: for L0 constant the
    derivative term vanishes and K0 = ln L0; for L0 = const (log u)^r the
    ln L0 term diverges to sign(r) * infinity while the derivative term stays
    bounded, so K0 = +inf for r > 0 and -inf for r < 0.  K0 = +inf forces the
    maximizer to M_max and K0 = -inf forces it to 0; finite K0 maximizes the
    concave objective on [0, M_max].
    """
    if M_max <= 0.0:
        raise ValueError("M_max must be positive")
    r = rv.log_power_r
    if r > 0.0:
        return math.inf, M_max
    if r < 0.0:
        return -math.inf, 0.0
    K0 = math.log(rv.L0_const)
    res = optimize.minimize_scalar(
        lambda M: -precision_objective(M, sigma0, K0),
        bounds=(0.0, M_max), method="bounded",
        options={"xatol": 1e-8})
    M0 = float(res.x)
    # snap to the endpoints when the interior search lands next to them
    for edge in (0.0, M_max):
        if abs(M0 - edge) < 1e-6 and precision_objective(edge, sigma0, K0) \
                >= precision_objective(M0, sigma0, K0):
            M0 = edge
    return K0, M0


# ---------------------------------------------------------------------------
# bundled constants


@dataclass(frozen=True)
class AsymptoticConstants:
    sigma0: float
    sigma0n: float
    alpha_n: float
    tau1_sq: float
    tau2_sq: float
    c0: float
    K0: float  # may be +-inf
    M0: float

    def sandwich_var(self):
        """Limit variance of sqrt(alpha0(n)) (sigma_hat - sigma0n)."""
        return self.tau1_sq / self.tau2_sq ** 2

    def to_dict(self):
        return asdict(self)


def compute_constants(pop, n, M_max=50.0):
    """All limit quantities for one population and sample size."""
    if pop.rv is None:
        raise ValueError("population has no regular-variation descriptor")
    s0 = pop.rv.sigma0
    t2 = tau2_sq(s0)
    t1 = tau1_sq(s0)
    c0 = math.exp(log_gamma(1.0 - s0)) * (1.0 + s0) / (s0 * t2)
    K0, M0 = precision_limit(s0, pop.rv, M_max)
    return AsymptoticConstants(
        sigma0=s0, sigma0n=sigma0n_root(pop, n), alpha_n=float(pop.alpha0(n)),
        tau1_sq=t1, tau2_sq=t2, c0=c0, K0=K0, M0=M0)
