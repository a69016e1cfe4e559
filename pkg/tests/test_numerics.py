import math

import numpy as np
import pytest
from scipy import special

from pitmanyor.numerics import (IntegrationError, SeriesTolerance,
                                adaptive_integrate, g_sigma, g_sigma_values,
                                log_ascending_factorial, log_gamma,
                                log_sum_exp, poisson_weighted_reciprocal)


def test_log_gamma_matches_lgamma():
    xs = np.geomspace(1e-6, 1e12, 200)
    for x in xs:
        ref = math.lgamma(x)
        scale = max(abs(ref), 1.0)
        assert abs(log_gamma(float(x)) - ref) <= 1e-13 * scale


def test_log_gamma_known_values():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(2.0) == 0.0
    assert abs(log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-14


def test_log_gamma_domain():
    with pytest.raises(ValueError):
        log_gamma(0.0)
    with pytest.raises(ValueError):
        log_gamma(-1.5)


def test_log_ascending_factorial_against_product():
    for a in [0.1, 0.5, 1.0, 2.5, 10.0]:
        for n in [0, 1, 2, 7, 33, 100]:
            direct = float(np.sum(np.log(a + np.arange(n)))) if n else 0.0
            got = log_ascending_factorial(a, n)
            assert abs(got - direct) <= 1e-12 * max(abs(direct), 1.0)


def test_log_ascending_factorial_examples():
    assert log_ascending_factorial(1.0, 3) == pytest.approx(math.log(6.0))
    assert log_ascending_factorial(2.0, 0) == 0.0
    assert log_ascending_factorial(3.0, 1) == pytest.approx(math.log(3.0))


def test_g_sigma_base_cases():
    assert g_sigma(0, 0.5) == 0.0
    assert g_sigma(1, 0.5) == 0.0
    assert g_sigma(2, 0.5) == pytest.approx(2.0)
    assert g_sigma(3, 0.25) == pytest.approx(1.0 / 0.75 + 1.0 / 1.75)


def test_g_sigma_increment_identity():
    # g(m+1) - g(m) = 1/(m - sigma) exactly
    for sigma in (0.2, 0.5, 0.8):
        for m in list(range(1, 50)) + [4095, 4096, 10000]:
            diff = g_sigma(m + 1, sigma) - g_sigma(m, sigma)
            assert diff == pytest.approx(1.0 / (m - sigma), rel=1e-10)


def test_g_sigma_values_matches_scalar():
    m = np.array([0, 1, 2, 3, 17, 4096, 100000])
    for sigma in (0.25, 0.6):
        vec = g_sigma_values(m, sigma)
        for mi, vi in zip(m, vec):
            assert vi == pytest.approx(g_sigma(int(mi), sigma), rel=1e-11)


def test_g_sigma_domain():
    with pytest.raises(ValueError):
        g_sigma(3, 0.0)
    with pytest.raises(ValueError):
        g_sigma(3, 1.0)
    with pytest.raises(ValueError):
        g_sigma(-1, 0.5)


def test_poisson_weighted_reciprocal_monotone_in_sigma():
    for s in (0.1, 1.0, 10.0, 100.0):
        values = [poisson_weighted_reciprocal(s, sig)
                  for sig in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert all(b > a for a, b in zip(values, values[1:]))


def test_poisson_weighted_reciprocal_small_s():
    # leading term: e^{-s} s/(1-sigma)
    s, sigma = 1e-6, 0.5
    expected = math.exp(-s) * s / (1.0 - sigma)
    assert poisson_weighted_reciprocal(s, sigma) == pytest.approx(
        expected, rel=1e-5)
    assert poisson_weighted_reciprocal(0.0, sigma) == 0.0


def test_series_tolerance_validation():
    with pytest.raises(ValueError):
        SeriesTolerance(rel_tol=0.0)
    with pytest.raises(ValueError):
        SeriesTolerance(max_terms=0)


def test_log_sum_exp():
    v = np.array([0.0, math.log(2.0), math.log(3.0)])
    assert log_sum_exp(v) == pytest.approx(math.log(6.0), rel=1e-14)
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(
        1000.0 + math.log(2.0))
    assert log_sum_exp([-np.inf, -np.inf]) == -np.inf
    with pytest.raises(ValueError):
        log_sum_exp([])


def test_adaptive_integrate_smooth():
    val = adaptive_integrate(math.exp, 0.0, 1.0)
    assert val == pytest.approx(math.e - 1.0, rel=1e-12)


def test_adaptive_integrate_endpoint_singularity():
    # s^{-gamma} singularity at 0, the shape of the centering integrand
    for gamma in (0.3, 0.5, 0.8):
        val = adaptive_integrate(lambda s: s ** (-gamma), 0.0, 1.0)
        assert val == pytest.approx(1.0 / (1.0 - gamma), rel=1e-9)


def test_adaptive_integrate_gamma_function():
    val = adaptive_integrate(lambda s: s ** (-0.5) * math.exp(-s), 0.0, 40.0)
    assert val == pytest.approx(math.gamma(0.5), rel=1e-9)


def test_adaptive_integrate_failure_carries_estimate():
    # an oscillatory integrand the panel budget cannot resolve
    with pytest.raises(IntegrationError) as info:
        adaptive_integrate(lambda s: math.sin(1e7 * s), 0.0, 1.0,
                           rel_tol=1e-14, max_panels=8)
    assert math.isfinite(info.value.estimate)
    assert info.value.error_bound > 0.0


def test_adaptive_integrate_domain():
    with pytest.raises(ValueError):
        adaptive_integrate(math.exp, 1.0, 1.0)
