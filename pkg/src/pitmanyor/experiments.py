"""Monte Carlo and deterministic verification harness.

Each run_* function draws replications with per-replication RNG streams
(stream_id = replication index), folds results in index order, and returns an
ExperimentReport whose JSON serialization is byte-identical across reruns and
worker counts (modulo the wall-clock field).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats as sps

from . import asymptotics, estimators, inference, partition
from .likelihood import log_eppf
from .numerics import g_sigma_values
from .population import population_from_json
from .sampler import RngStream, sample_iid, sample_poissonized

_BOUNDARY_LOGLIK_SLACK = 0.5  # profile boundary indistinguishability


@dataclass(frozen=True)
class ExperimentConfig:
    population: dict
    n_grid: tuple
    replications: int = 2
    M_values: tuple = (0.0,)
    prior: inference.PriorSpec = field(default_factory=inference.PriorSpec)
    seed: int = 0
    M_max: float = 5.0
    threads: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if not self.n_grid or list(self.n_grid) != sorted(self.n_grid):
            raise ValueError("n_grid must be nonempty and ascending")

    def make_population(self):
        return population_from_json(self.population)

    @classmethod
    def from_dict(cls, d):
        prior = d.get("prior", {})
        spec = inference.PriorSpec(
            sigma_kind=prior.get("sigma", "uniform"),
            beta_a=prior.get("beta", [1.0, 1.0])[0],
            beta_b=prior.get("beta", [1.0, 1.0])[1],
            M_kind=prior.get("M", {}).get("kind", "fixed"),
            M_value=prior.get("M", {}).get("value", 1.0),
            M_max=prior.get("M", {}).get("max", 50.0))
        return cls(population=d["population"], n_grid=tuple(d["n_grid"]),
                   replications=int(d.get("replications", 2)),
                   M_values=tuple(d.get("M_values", [0.0])),
                   prior=spec, seed=int(d.get("seed", 0)),
                   M_max=float(d.get("M_max", 5.0)),
                   threads=int(d.get("threads", 1)))


@dataclass(frozen=True)
class ExperimentReport:
    check: str
    config: dict
    results: dict
    passed: bool
    wall_clock: float

    def to_json(self, include_wall_clock=True):
        out = {"check": self.check, "config": self.config,
               "results": self.results, "passed": self.passed}
        if include_wall_clock:
            out["wall_clock"] = self.wall_clock
        return json.dumps(out, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    raise TypeError(f"not serializable: {type(x)}")


def _map_replications(fn, count, threads):
    """fn(replication_index) evaluated for 0..count-1; results folded in
    index order regardless of scheduling."""
    if threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _excluded_guard(excluded, total):
    rate = excluded / total
    if rate > 0.05:
        raise RuntimeError(
            f"boundary-estimate exclusion rate {rate:.1%} exceeds 5%")
    return rate


# ---------------------------------------------------------------------------
# Asymptotic normality of the empirical Bayes estimator


def run_normality(config):
    t0 = time.time()
    pop = config.make_population()
    M = config.M_values[0]
    R = config.replications
    per_n = {}
    ok = True
    for n in config.n_grid:
        s0n = asymptotics.sigma0n_root(pop, n)
        a0 = pop.alpha0(n)
        limit_var = asymptotics.tau1_sq(pop.rv.sigma0) \
            / asymptotics.tau2_sq(pop.rv.sigma0) ** 2

        def one(r, n=n, s0n=s0n, a0=a0):
            occ = sample_iid(pop, n, RngStream(config.seed, r))
            e = estimators.mle_sigma(partition.from_occupancy(occ), M)
            return math.sqrt(a0) * (e.sigma_hat - s0n) if e.interior else None

        raw = _map_replications(one, R, config.threads)
        z = np.array([v for v in raw if v is not None])
        excl = _excluded_guard(R - z.size, R)
        ks = sps.kstest(z / math.sqrt(limit_var), "norm")
        ks_crit = 1.628 / math.sqrt(z.size)  # asymptotic 1% critical value
        mean_se = math.sqrt(limit_var / z.size)
        row = {
            "sigma0n": s0n, "alpha0n": a0, "limit_var": limit_var,
            "mean": float(z.mean()), "mean_se": mean_se,
            "var": float(z.var(ddof=1)),
            "var_se": float(_jackknife_var_se(z)),
            "var_ratio": float(z.var(ddof=1) / limit_var),
            "ks_stat": float(ks.statistic), "ks_crit_01": ks_crit,
            "excluded_rate": excl,
        }
        row["pass"] = (abs(row["mean"]) <= 3.0 * mean_se
                       and abs(row["var_ratio"] - 1.0) <= 0.15
                       and row["ks_stat"] <= ks_crit)
        ok = ok and row["pass"]
        per_n[str(n)] = row
    return ExperimentReport("normality", _config_dict(config), per_n, ok,
                            time.time() - t0)


def _jackknife_var_se(z):
    n = z.size
    if n < 3:  # delete-one samples are too small to carry a variance
        return 0.0
    jack = np.array([np.var(np.delete(z, i), ddof=1) for i in range(n)])
    return math.sqrt((n - 1) / n * np.sum((jack - jack.mean()) ** 2))


# ---------------------------------------------------------------------------
# Bernstein-von Mises comparison


def run_bvm(config):
    t0 = time.time()
    pop = config.make_population()
    R = config.replications
    sigma0 = pop.rv.sigma0
    t2 = asymptotics.tau2_sq(sigma0)
    med_gap = []
    med_drift = []
    for n in config.n_grid:
        a0 = pop.alpha0(n)
        var_bvm = 1.0 / (a0 * t2)

        def one(r, n=n, a0=a0, var_bvm=var_bvm):
            occ = sample_iid(pop, n, RngStream(config.seed, r))
            st = partition.from_occupancy(occ)
            M = config.prior.M_value if config.prior.M_kind == "fixed" else 0.0
            e = estimators.mle_sigma(st, M)
            post = inference.posterior_sigma(st, config.prior)
            gap = inference.bvm_gap(post, e.sigma_hat, var_bvm)
            drift = math.sqrt(a0) * abs(post.mean - e.sigma_hat)
            return gap, drift

        rows = _map_replications(one, R, config.threads)
        med_gap.append(float(np.median([g for g, _ in rows])))
        med_drift.append(float(np.median([d for _, d in rows])))
    decreasing = all(b < a for a, b in zip(med_gap, med_gap[1:]))
    drift_dec = all(b < a for a, b in zip(med_drift, med_drift[1:]))
    results = {
        "n_grid": list(config.n_grid),
        "median_gap": med_gap, "median_scaled_drift": med_drift,
        "gap_decreasing": decreasing, "drift_decreasing": drift_dec,
        "final_gap": med_gap[-1],
    }
    ok = decreasing and drift_dec and med_gap[-1] < 0.1
    return ExperimentReport("bvm", _config_dict(config), results, ok,
                            time.time() - t0)


# ---------------------------------------------------------------------------
# Deterministic score-moment limits


def _atom_intensities(pop, n, cut=1e-4):
    limit = pop.n_atoms()
    size = 1 << 10
    while True:
        if limit is not None:
            size = min(size, limit)
        probs = pop.atom_probs(size)
        if (limit is not None and size == limit) or n * probs[-1] < cut:
            break
        size *= 2
    lam = n * probs
    explicit = int(np.searchsorted(-lam, -cut, side="right"))
    if limit is not None and size == limit:
        tails = (0.0, 0.0, 0.0)
    else:
        tails = tuple(n ** k * pop.tail_power_sum(size, k) for k in (1, 2, 3))
    extra = lam[explicit:]
    t1 = float(np.sum(extra)) + tails[0]
    t2 = float(np.sum(extra ** 2)) + tails[1]
    t3 = float(np.sum(extra ** 3)) + tails[2]
    return lam[:explicit], (t1, t2, t3)


def _eg_powers(lam, sigma):
    """Per-atom E g, E g^2, E g^3, E g-dot for Poisson(lam) occupancies.

    Exact windowed summation over the Poisson pmf in the log domain; the
    window lam +- 12 sqrt(lam) + 60 leaves mass below 1e-25.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.zeros((4, lam.size))
    for i, l in enumerate(lam):
        m_lo = max(2, int(l - 12.0 * math.sqrt(l)))
        m_hi = int(l + 12.0 * math.sqrt(l) + 60.0)
        m = np.arange(m_lo, m_hi + 1, dtype=float)
        pmf = np.exp(m * math.log(l) - l - special.gammaln(m + 1.0))
        g = special.digamma(m - sigma) - special.digamma(1.0 - sigma)
        gdot = special.polygamma(1, 1.0 - sigma) \
            - special.polygamma(1, m - sigma)
        out[0, i] = np.sum(pmf * g)
        out[1, i] = np.sum(pmf * g ** 2)
        out[2, i] = np.sum(pmf * g ** 3)
        out[3, i] = np.sum(pmf * gdot)
    return out


def _eg_powers_small(lam, sigma, m_cap):
    """Vectorized pmf recursion for moderate intensities."""
    pmf = np.exp(-lam) * lam  # P(X = 1)
    eg = np.zeros_like(lam)
    eg2 = np.zeros_like(lam)
    eg3 = np.zeros_like(lam)
    egdot = np.zeros_like(lam)
    g = 0.0
    gdot = 0.0
    for m in range(2, m_cap + 1):
        pmf = pmf * lam / m
        g += 1.0 / (m - 1.0 - sigma)
        gdot += 1.0 / (m - 1.0 - sigma) ** 2
        eg += pmf * g
        eg2 += pmf * g * g
        eg3 += pmf * g * g * g
        egdot += pmf * gdot
    return np.stack([eg, eg2, eg3, egdot])


_SMALL_LAM_SPLIT = 30.0


def lemma_limit_ratios(pop, n, sigma=None):
    """LHS/(alpha0(n) * RHS) for the eight Poissonized occupancy limits.

    LHS are exact sums of Poisson expectations over the atoms (no sampling);
    RHS are the limit series.  sigma defaults to the population's sigma0.
    """
    gamma = pop.rv.sigma0
    sigma = gamma if sigma is None else sigma
    lam, (t1, t2, t3) = _atom_intensities(pop, n)
    a0 = pop.alpha0(n)
    split = int(np.searchsorted(-lam, -_SMALL_LAM_SPLIT, side="right"))
    big, small = lam[:split], lam[split:]
    m_cap = int(_SMALL_LAM_SPLIT + 12.0 * math.sqrt(_SMALL_LAM_SPLIT) + 40.0)
    pw = np.concatenate(
        [_eg_powers(big, sigma), _eg_powers_small(small, sigma, m_cap)],
        axis=1)
    eg, eg2, eg3, egdot = pw
    exp_lam = np.exp(-lam)
    gfac = math.exp(special.gammaln(1.0 - gamma))

    # analytic tails from the first three power sums (third order in lam)
    s1 = 1.0 - sigma
    s2 = 2.0 - sigma
    tail_occ = t1 - t2 / 2.0 + t3 / 6.0
    tail_var = t1 - 1.5 * t2 + 7.0 * t3 / 6.0
    tail_eg = (t2 / 2.0 - t3 / 3.0) / s1 + t3 / 6.0 / s2
    tail_egdot = (t2 / 2.0 - t3 / 3.0) / s1 ** 2 + t3 / 6.0 / s2 ** 2
    tail_eg2 = (t2 / 2.0 - t3 / 2.0) / s1 ** 2 \
        + t3 / 6.0 * (1.0 / s1 + 1.0 / s2) ** 2
    tail_eg3 = (t2 / 2.0 - t3 / 2.0) / s1 ** 3 \
        + t3 / 6.0 * (1.0 / s1 + 1.0 / s2) ** 3
    tail_exp_eg = (t2 / 2.0 - 5.0 * t3 / 6.0) / s1 + t3 / 6.0 / s2

    lhs = {
        "i": float(np.sum(-np.expm1(-lam))) + tail_occ,
        "ii": float(np.sum(exp_lam * (1.0 - exp_lam))) + tail_var,
        "iii": float(np.sum(eg)) + tail_eg,
        "iv": float(np.sum(egdot)) + tail_egdot,
        "v": float(np.sum(eg2)) + tail_eg2,
        "vi": float(np.sum(eg ** 2)),
        "vii": float(np.sum(exp_lam * eg)) + tail_exp_eg,
        "viii": float(np.sum(eg3)) + tail_eg3,
    }
    rhs = {
        "i": gfac,
        "ii": (2.0 ** gamma - 1.0) * gfac,
        "iii": _series_m(gamma, sigma, 1, 0),
        "iv": _series_m(gamma, sigma, 2, 0),
        "v": asymptotics._tau1_component2(gamma) if sigma == gamma
        else _series_m(gamma, sigma, 1, 1),
        "vi": asymptotics._tau1_component3(gamma),
        "vii": gamma * asymptotics._tau1_component4(gamma) / 2.0,
        "viii": _series_m(gamma, sigma, 1, 2),
    }
    return {k: lhs[k] / (a0 * rhs[k]) for k in lhs}


def _series_m(gamma, sigma, denom_power, g_power, m_star=1_000_000):
    """sum_m Gamma(m+1-gamma)/(m! (m-sigma)^denom_power) * G_p(m)
    where G_0 = 1, G_1 = g(m+1)+g(m), G_2 = g^2(m+1)+g(m+1)g(m)+g^2(m),
    with Hurwitz-zeta (and log-corrected) tails."""
    m = np.arange(1, m_star + 1, dtype=float)
    ratio = np.exp(special.gammaln(m + 1.0 - gamma) - special.gammaln(m + 1.0))
    base = ratio / (m - sigma) ** denom_power
    g = g_sigma_values(np.arange(0, m_star + 2), gamma)
    if g_power == 0:
        gg = 1.0
    elif g_power == 1:
        gg = g[2:m_star + 2] + g[1:m_star + 1]
    else:
        gg = g[2:m_star + 2] ** 2 + g[2:m_star + 2] * g[1:m_star + 1] \
            + g[1:m_star + 1] ** 2
    head = float(np.sum(base * gg))
    a = m_star + 1
    s = denom_power + gamma
    B = -float(special.digamma(1.0 - gamma))
    if g_power == 0:
        tail = _z(s, a)
    elif g_power == 1:
        tail = 2.0 * _zlog(s, a) + 2.0 * B * _z(s, a)
    else:
        tail = 3.0 * (_zlog2(s, a) + 2.0 * B * _zlog(s, a)
                      + B ** 2 * _z(s, a))
    return head + tail


def _z(s, a):
    return float(special.zeta(s, a))


def _zlog(s, a, h=1e-5):
    return float((special.zeta(s - h, a) - special.zeta(s + h, a)) / (2 * h))


def _zlog2(s, a, h=1e-4):
    return float((special.zeta(s - h, a) - 2.0 * special.zeta(s, a)
                  + special.zeta(s + h, a)) / h ** 2)


def run_lemma_limits(pop, sigma=None, n_grid=(10 ** 6,), tolerance=0.05):
    """Ratio table along n_grid; the pass gate applies at the largest n."""
    t0 = time.time()
    table = {str(int(n)): lemma_limit_ratios(pop, n, sigma) for n in n_grid}
    last = table[str(int(max(n_grid)))]
    ok = all(abs(v - 1.0) <= tolerance for v in last.values())
    results = {"n_grid": [int(n) for n in n_grid], "tolerance": tolerance,
               "ratios": table}
    return ExperimentReport("lemma_limits", {"population": pop.spec_dict()},
                            results, ok, time.time() - t0)


# ---------------------------------------------------------------------------
# Centering-root convergence rate


def run_root_rate(pop, n_grid, slope_window=(-0.65, -0.35)):
    t0 = time.time()
    sigma0 = pop.rv.sigma0
    roots = [asymptotics.sigma0n_root(pop, n) for n in n_grid]
    results = {"n_grid": [int(n) for n in n_grid],
               "roots": roots, "sigma0": sigma0}
    if len(n_grid) < 2:
        results["slope"] = None
        return ExperimentReport("root_rate", {"population": pop.spec_dict()},
                                results, True, time.time() - t0)
    gaps = np.abs(np.array(roots) - sigma0)
    slope = float(np.polyfit(np.log(np.array(n_grid, dtype=float)),
                             np.log(gaps), 1)[0])
    results["slope"] = slope
    bounded = pop.rv.log_power_r == 0.0
    ok = (slope_window[0] <= slope <= slope_window[1]) if bounded else True
    results["slope_gated"] = bounded
    return ExperimentReport("root_rate", {"population": pop.spec_dict()},
                            results, ok, time.time() - t0)


# ---------------------------------------------------------------------------
# tau1 Monte Carlo cross-check


def run_tau1_mc(pop, n, replications, seed=0, tolerance=0.10, threads=1):
    t0 = time.time()
    sigma = asymptotics.sigma0n_root(pop, n)
    a0 = pop.alpha0(n)

    def one(r):
        occ = sample_poissonized(pop, n, RngStream(seed, r))
        counts = occ.values()
        return float(counts.size / sigma
                     - np.sum(g_sigma_values(counts, sigma)))

    vals = np.array(_map_replications(one, replications, threads))
    var = float(vals.var(ddof=1) / a0)
    limit = asymptotics.tau1_sq(pop.rv.sigma0)
    results = {
        "n": int(n), "replications": replications, "sigma0n": sigma,
        "var_over_alpha": var, "tau1_sq": limit, "ratio": var / limit,
        "jackknife_se": float(_jackknife_var_se(vals) / a0),
    }
    ok = abs(var / limit - 1.0) <= tolerance
    return ExperimentReport("tau1_mc", {"population": pop.spec_dict(),
                                        "seed": seed},
                            results, ok, time.time() - t0)


# ---------------------------------------------------------------------------
# Joint profile behavior of (sigma, M)


def run_precision_profile(config):
    t0 = time.time()
    pop = config.make_population()
    R = config.replications
    K0, M0 = asymptotics.precision_limit(pop.rv.sigma0, pop.rv, config.M_max)
    per_n = {}
    fractions = []
    for n in config.n_grid:
        def one(r, n=n):
            occ = sample_iid(pop, n, RngStream(config.seed, r))
            st = partition.from_occupancy(occ)
            p = estimators.profile_mle(st, M_max=config.M_max)
            # "at the boundary" = the profile log likelihood at the predicted
            # boundary is statistically indistinguishable from the maximum
            if math.isinf(K0):
                sig_b = estimators.mle_sigma(st, M0).sigma_hat
                at_boundary = (abs(p.M_hat - M0) <= 1e-5
                               or p.log_lik - log_eppf(st, sig_b, M0)
                               <= _BOUNDARY_LOGLIK_SLACK)
            else:
                at_boundary = False
            sig_by_M = [estimators.mle_sigma(st, M).sigma_hat
                        for M in config.M_values]
            return p.M_hat, at_boundary, sig_by_M

        rows = _map_replications(one, R, config.threads)
        frac = float(np.mean([b for _, b, _ in rows]))
        fractions.append(frac)
        spread = max(float(np.ptp(s)) for _, _, s in rows) \
            if config.M_values else 0.0
        agree = spread <= 3.0 / math.sqrt(pop.alpha0(n))
        per_n[str(n)] = {
            "M_hat_median": float(np.median([m for m, _, _ in rows])),
            "boundary_fraction": frac,
            "sigma_spread_max": spread, "sigma_agreement": agree,
        }
    nondecreasing = all(b >= a for a, b in zip(fractions, fractions[1:]))
    results = {"K0": K0, "M0": M0, "per_n": per_n,
               "boundary_fractions": fractions,
               "nondecreasing": nondecreasing}
    ok = (not math.isinf(K0)) or (nondecreasing and fractions[-1] >= 0.6)
    return ExperimentReport("precision_profile", _config_dict(config),
                            results, ok, time.time() - t0)


# ---------------------------------------------------------------------------
# Forensic likelihood ratio


def run_forensic(config):
    t0 = time.time()
    pop = config.make_population()
    R = config.replications
    n = config.n_grid[-1]
    sigma0 = pop.rv.sigma0
    s0n = asymptotics.sigma0n_root(pop, n + 1)
    a0 = pop.alpha0(n)
    t1 = asymptotics.tau1_sq(sigma0)
    t2 = asymptotics.tau2_sq(sigma0)
    scale = math.sqrt(a0) * (1.0 - sigma0) ** 2 * t2 / math.sqrt(t1)

    def one(r):
        occ = sample_iid(pop, n, RngStream(config.seed, r))
        counts = dict(occ.counts)
        counts[max(counts) + 1] = 1  # the crime profile, a fresh singleton
        st = partition.from_occupancy(counts)
        lr, phi_mean, _ = inference.forensic_lr(st, config.prior)
        z = scale * (1.0 / (n * phi_mean) - 1.0 / (1.0 - s0n))
        return z, lr > n + 1

    rows = _map_replications(one, R, config.threads)
    z = np.array([v for v, _ in rows])
    lr_frac = float(np.mean([okk for _, okk in rows]))
    ks = sps.kstest(z, "norm")
    results = {
        "n": int(n), "replications": R,
        "var_ratio": float(z.var(ddof=1)), "mean": float(z.mean()),
        "mean_se": float(z.std(ddof=1) / math.sqrt(z.size)),
        "lr_gt_n_plus_1_fraction": lr_frac,
        "ks_stat": float(ks.statistic),
        "ks_crit_01": 1.628 / math.sqrt(z.size),
    }
    ok = abs(results["var_ratio"] - 1.0) <= 0.20 and lr_frac == 1.0
    return ExperimentReport("forensic", _config_dict(config), results, ok,
                            time.time() - t0)


# ---------------------------------------------------------------------------
# deterministic property checks (used by the verify suite and tests)


def binomial_identity_residual(n, l, p):
    """Relative residual of
    sum_{m=l+1}^n C(n,m) p^{m-1}(1-p)^{n-m-1}(m - np)
      = (n-l) C(n,l) p^l (1-p)^{n-l-1}."""
    # the terms telescope across ~200 orders of magnitude at p near 1, so
    # the check is done in exact rational arithmetic
    from fractions import Fraction

    q = Fraction(str(p))
    lhs = Fraction(0)
    for m in range(l + 1, n + 1):
        lhs += special.comb(n, m, exact=True) * q ** (m - 1) \
            * (1 - q) ** (n - m - 1) * (m - n * q)
    rhs = (n - l) * special.comb(n, l, exact=True) * q ** l \
        * (1 - q) ** (n - l - 1)
    if rhs == 0:
        return float(abs(lhs))
    return float(abs(lhs - rhs) / abs(rhs))


def stirling_ratio_envelope(gammas=(0.2, 0.5, 0.8), n_lo=10, n_hi=10 ** 6):
    """max over the grid of n * |Gamma(n-gamma) n^gamma / Gamma(n) - 1|
    (finite iff the ratio is 1 + O(1/n))."""
    n = np.unique(np.geomspace(n_lo, n_hi, 200).astype(np.int64)).astype(float)
    worst = 0.0
    for gamma in gammas:
        ratio = np.exp(special.gammaln(n - gamma) + gamma * np.log(n)
                       - special.gammaln(n))
        worst = max(worst, float(np.max(n * np.abs(ratio - 1.0))))
    return worst


def moment_inequality_holds(s_values=(0.1, 1.0, 10.0),
                            deltas=(0.25, 0.5, 1.0), m_max=200):
    """sum_m s^m m^delta / m! <= s^delta e^s on the grid."""
    m = np.arange(1, m_max + 1, dtype=float)
    for s in s_values:
        terms = np.exp(m * math.log(s) - special.gammaln(m + 1.0))
        for d in deltas:
            if float(np.sum(terms * m ** d)) > s ** d * math.exp(s) * (1 + 1e-12):
                return False
    return True


def log_factor_expansion_c(K_values=(10, 32, 100, 316, 1000, 3162, 10000),
                           M_values=(0.0, 1.0, 10.0),
                           sigmas=(0.25, 0.5, 0.75)):
    """Fitted universal constant c with
    |sum_{i<K} ln(M + i sigma) - [K ln K + K ln(sigma/e) + (M/sigma - 1/2) ln K
    + ln(sqrt(2 pi)/sigma) - ln Gamma(1 + M/sigma)]| <= c (M/sigma + 1)^2 / K."""
    worst = 0.0
    for K in K_values:
        i = np.arange(1, K, dtype=float)
        for M in M_values:
            for sigma in sigmas:
                a = M / sigma
                lhs = float(np.sum(np.log(M + i * sigma)))
                main = K * math.log(K) + K * math.log(sigma / math.e) \
                    + (a - 0.5) * math.log(K) \
                    + math.log(math.sqrt(2.0 * math.pi) / sigma) \
                    - float(special.gammaln(1.0 + a))
                worst = max(worst, abs(lhs - main) * K / (a + 1.0) ** 2)
    return worst


def verify_suite(fast=True):
    """Deterministic invariant checks; returns a list of
    (name, passed, detail) rows.  `fast` trims the expensive enumerations."""
    from itertools import product

    from .likelihood import eppf_total_mass
    from .population import make_power_law
    from .sampler import exact_partition_law

    rows = []
    n_norm = 6 if fast else 8
    worst = 0.0
    for sigma, M in product((0.25, 0.5, 0.75), (0.0, 0.5, 1.0, 5.0)):
        for n in range(2, n_norm + 1):
            worst = max(worst, abs(eppf_total_mass(n, sigma, M) - 1.0))
    rows.append((f"eppf normalization (n <= {n_norm})", worst <= 1e-10,
                 f"max |mass - 1| = {worst:.2e}"))

    worst = 0.0
    for sigma, M in ((0.25, 0.5), (0.5, 1.0), (0.75, 0.0)):
        for blocks, prob in exact_partition_law(sigma, M, 4).items():
            stats = partition.from_sizes([len(b) for b in blocks])
            worst = max(worst, abs(prob - math.exp(log_eppf(stats, sigma, M))))
    rows.append(("sampler law vs eppf (n = 4)", worst <= 1e-12,
                 f"max deviation = {worst:.2e}"))

    worst = 0.0
    for gamma in (0.2, 0.35, 0.5, 0.65, 0.8):
        worst = max(worst, abs(asymptotics.E0_series(gamma, gamma)))
        target = math.exp(special.gammaln(1.0 - gamma)) / gamma
        worst = max(worst,
                    abs(asymptotics.gamma_ratio_sum(gamma) / target - 1.0))
    rows.append(("series identities", worst <= 1e-7,
                 f"max residual = {worst:.2e}"))

    worst = 0.0
    h = 1e-4
    for s0 in (0.25, 0.5, 0.75):
        fd = (asymptotics.E0_series(s0 - h, s0)
              - asymptotics.E0_series(s0 + h, s0)) / (2.0 * h)
        worst = max(worst, abs(fd / asymptotics.tau2_sq(s0) - 1.0))
    rows.append(("tau2 vs finite difference", worst <= 1e-4,
                 f"max rel err = {worst:.2e}"))

    worst = 0.0
    for n in (5, 20, 100):
        for p in (0.01, 0.3, 0.9):
            for l in range(0, n, max(1, n // 5)):
                worst = max(worst, binomial_identity_residual(n, l, p))
    rows.append(("binomial summation identity", worst <= 1e-10,
                 f"max rel residual = {worst:.2e}"))

    c = stirling_ratio_envelope()
    rows.append(("Stirling ratio O(1/n) envelope", c < 5.0,
                 f"fitted c = {c:.3f}"))
    rows.append(("Poisson moment inequality", moment_inequality_holds(), ""))
    c = log_factor_expansion_c()
    rows.append(("log-factor expansion remainder", c < 5.0,
                 f"fitted c = {c:.3f}"))

    if not fast:
        rep = run_lemma_limits(make_power_law(2.0), n_grid=(10 ** 5,),
                               tolerance=0.10)
        ratios = rep.results["ratios"][str(10 ** 5)]
        rows.append(("occupancy limit ratios (n = 1e5, 10%)", rep.passed,
                     "worst ratio = "
                     f"{max(ratios.values(), key=lambda v: abs(v - 1.0)):.4f}"))
    return rows


def _config_dict(config):
    return {
        "population": config.population, "n_grid": list(config.n_grid),
        "replications": config.replications,
        "M_values": list(config.M_values),
        "prior": config.prior.to_dict(), "seed": config.seed,
        "M_max": config.M_max,
    }
