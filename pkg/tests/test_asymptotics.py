import math

import numpy as np
import pytest

from pitmanyor import asymptotics
from pitmanyor.asymptotics import (E0_series, E0n, E0n_derivative,
                                   compute_constants, gamma_ratio_sum,
                                   precision_limit, precision_objective,
                                   sigma0n_root, tau1_components, tau1_sq,
                                   tau2_sq)
from pitmanyor.population import RegularVariation, make_power_law, \
    make_synthetic

GAMMAS = (0.2, 0.35, 0.5, 0.65, 0.8)

# frozen values, cross-checked against finite differences and Monte Carlo
TAU2_ORACLE = {0.25: 21.77753184, 0.5: 11.13665599, 0.75: 21.47754720}
TAU1_ORACLE = {0.25: 3.475266, 0.5: 3.262311, 0.75: 8.706963}
ROOT_ORACLE = {  # power law alpha=2
    10 ** 3: 0.51879709, 10 ** 4: 0.50717970, 10 ** 5: 0.50267714,
}


def test_e0_series_vanishes_at_sigma0():
    for gamma in GAMMAS:
        assert abs(E0_series(gamma, gamma)) <= 1e-7


def test_e0_series_sign_change():
    for gamma in (0.3, 0.5, 0.7):
        assert E0_series(gamma - 0.05, gamma) > 0.0
        assert E0_series(gamma + 0.05, gamma) < 0.0


def test_gamma_ratio_sum_identity():
    for gamma in GAMMAS:
        target = math.gamma(1.0 - gamma) / gamma
        assert abs(gamma_ratio_sum(gamma) / target - 1.0) <= 1e-7


def test_tau2_oracle_values():
    for s0, want in TAU2_ORACLE.items():
        assert tau2_sq(s0) == pytest.approx(want, rel=1e-7)


def test_tau2_matches_slope_of_e0():
    h = 1e-4
    for s0 in (0.25, 0.5, 0.75):
        fd = (E0_series(s0 - h, s0) - E0_series(s0 + h, s0)) / (2.0 * h)
        assert abs(fd / tau2_sq(s0) - 1.0) <= 1e-4


def test_tau1_oracle_values():
    for s0, want in TAU1_ORACLE.items():
        assert tau1_sq(s0) == pytest.approx(want, rel=1e-4)


def test_tau1_first_component_closed_form():
    # (2^0.5 - 1) Gamma(0.5) / 0.25
    c1 = tau1_components(0.5)[0]
    want = (math.sqrt(2.0) - 1.0) * math.sqrt(math.pi) / 0.25
    assert c1 == pytest.approx(want, rel=1e-12)
    assert c1 == pytest.approx(2.9366976949, rel=1e-9)


def test_tau1_positive():
    for s0 in (0.1, 0.3, 0.5, 0.7, 0.9):
        assert tau1_sq(s0) > 0.0


def test_e0n_strictly_decreasing():
    pop = make_power_law(2.0)
    sig = np.linspace(0.05, 0.95, 10)
    vals = [E0n(pop, 1000, float(s)) for s in sig]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_e0n_derivative_matches_fd():
    pop = make_power_law(2.0)
    h = 1e-5
    for sigma in (0.3, 0.5, 0.7):
        fd = (E0n(pop, 10 ** 4, sigma + h)
              - E0n(pop, 10 ** 4, sigma - h)) / (2.0 * h)
        der = E0n_derivative(pop, 10 ** 4, sigma)
        assert abs(der / fd - 1.0) <= 1e-5


def test_root_oracle_values():
    pop = make_power_law(2.0)
    for n, want in ROOT_ORACLE.items():
        assert sigma0n_root(pop, n) == pytest.approx(want, abs=2e-7)


def test_root_contract():
    pop = make_power_law(2.0)
    for n in (10 ** 3, 10 ** 5):
        root = sigma0n_root(pop, n)
        assert abs(E0n(pop, n, root)) <= pop.alpha0(n) * 1e-8


def test_root_in_sanity_window():
    pop = make_power_law(2.0)
    root = sigma0n_root(pop, 10 ** 4)
    half_width = 5.0 * 10.0 / math.sqrt(10 ** 4)
    assert 0.5 - half_width < root < 0.5 + half_width


def test_root_sequence_converges():
    pop = make_power_law(2.0)
    gaps = [abs(sigma0n_root(pop, 2 * n) - sigma0n_root(pop, n))
            for n in (10 ** 3, 10 ** 4, 10 ** 5)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_scaled_convergence_to_e0_series():
    # E0n/alpha0 approaches E0_series monotonically, within 2% at n = 1e5
    pop = make_power_law(2.0)
    sigma = 0.3
    target = E0_series(sigma, 0.5)
    errs = [abs(E0n(pop, n, sigma) / pop.alpha0(n) - target)
            for n in (10 ** 3, 10 ** 4, 10 ** 5)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.02 * abs(target)


def test_precision_limit_symbolic():
    M_max = 7.0
    up = make_synthetic(0.5, 1.0).rv
    down = make_synthetic(0.5, -1.0).rv
    assert precision_limit(0.5, up, M_max) == (math.inf, M_max)
    assert precision_limit(0.5, down, M_max) == (-math.inf, 0.0)


def test_precision_limit_constant_l0_grid_scan():
    M_max = 10.0
    for L0_const in (0.05, 1.0, 20.0):
        rv = RegularVariation(sigma0=0.5, L0_const=L0_const)
        K0, M0 = precision_limit(0.5, rv, M_max)
        assert K0 == pytest.approx(math.log(L0_const))
        grid = np.linspace(0.0, M_max, 10 ** 4)
        vals = [precision_objective(float(M), 0.5, K0) for M in grid]
        M_scan = float(grid[int(np.argmax(vals))])
        assert abs(M0 - M_scan) <= 2.0 * M_max / 10 ** 4 + 1e-6


def test_sigma0n_root_validation():
    pop = make_power_law(2.0)
    with pytest.raises(ValueError):
        sigma0n_root(pop, 1)


def test_compute_constants_bundle():
    pop = make_power_law(2.0)
    c = compute_constants(pop, 10 ** 4, M_max=5.0)
    assert c.sigma0 == pytest.approx(0.5)
    assert c.sigma0n == pytest.approx(ROOT_ORACLE[10 ** 4], abs=1e-6)
    assert c.alpha_n == pop.alpha0(10 ** 4)
    assert c.sandwich_var() == pytest.approx(
        TAU1_ORACLE[0.5] / TAU2_ORACLE[0.5] ** 2, rel=1e-4)
    assert c.sandwich_var() == pytest.approx(0.02630, abs=2e-5)
    d = c.to_dict()
    assert set(d) >= {"sigma0", "sigma0n", "tau1_sq", "tau2_sq", "K0", "M0"}


def test_domain_errors():
    with pytest.raises(ValueError):
        E0_series(0.5, 1.5)
    with pytest.raises(ValueError):
        tau2_sq(0.0)
    with pytest.raises(ValueError):
        tau1_sq(1.0)
