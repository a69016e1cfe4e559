"""The deterministic side of the theory: centering roots, their convergence
rate, and the sandwich variance constants for a power-law species population.

For a population with power-law cell decay of index alpha the estimable
type is sigma_0 = 1/alpha.  The estimator does not center at sigma_0 in
finite samples but at the root sigma_0n of a deterministic score equation;
this script computes those roots, shows the |sigma_0n - sigma_0| ~ n^{-1/2}
decay (up to slowly varying factors), and prints the variance constants
tau_1^2 and tau_2^2 that enter the Gaussian limit.

Run:  python3 demos/asymptotic_constants.py
"""

import math

import numpy as np

from pitmanyor import asymptotics, make_power_law

ALPHA = 2.0
pop = make_power_law(ALPHA)
sigma0 = pop.rv.sigma0
print(f"power-law population, alpha = {ALPHA}: sigma_0 = {sigma0}")

print("\ncentering roots:")
n_grid = [10 ** k for k in range(3, 7)]
gaps = []
for n in n_grid:
    root = asymptotics.sigma0n_root(pop, n)
    gaps.append(abs(root - sigma0))
    print(f"  n = {n:>9,}: sigma_0n = {root:.8f}  "
          f"(gap {gaps[-1]:.2e}, alpha_n = {pop.alpha0(n):,.0f})")

slope = float(np.polyfit(np.log(n_grid), np.log(gaps), 1)[0])
print(f"\nlog-log slope of the gap: {slope:.3f}  (rate ~ n^{{-1/2}})")

print("\nvariance constants:")
for s0 in (0.25, 0.5, 0.75):
    t1 = asymptotics.tau1_sq(s0)
    t2 = asymptotics.tau2_sq(s0)
    print(f"  sigma_0 = {s0}: tau1^2 = {t1:.6f}, tau2^2 = {t2:.6f}, "
          f"sandwich var = tau1^2/tau2^4 = {t1 / t2 ** 2:.5f}")

n = 10 ** 6
c = asymptotics.compute_constants(pop, n)
se = math.sqrt(c.sandwich_var() / c.alpha_n)
print(f"\nat n = {n:,}: the limit theory predicts "
      f"sd(sigma_hat) ~ {se:.2e} around sigma_0n = {c.sigma0n:.6f}")
