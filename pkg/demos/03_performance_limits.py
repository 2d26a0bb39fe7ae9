"""Tour of the theoretic limit calculators.

Everything is indexed by the scalar-channel noise variance delta_v: the
weighted-support-error floor and ROC curves reduce to incomplete-gamma
tails, the MAE floor is averaged numerically, and the MMSE curve inverts
by bisection.
"""

import numpy as np
from scipy.stats import chi2

from metricamp import (
    LimitQuery,
    invert_mmse,
    mmae,
    mmse_of_delta,
    mmwse,
    roc_area,
    roc_curve,
    state_evolution_delta,
)

rho = 0.1

print("minimum weighted support set error (beta=0.2):")
for J in (1, 3, 5):
    for dv in (0.02, 0.1, 0.5):
        res = mmwse(LimitQuery(dv, rho, J, 0.2))
        print(f"  J={J} delta_v={dv:4}: value={res.value:.5f} "
              f"p_fa={res.components[0]:.5f} p_miss={res.components[1]:.5f}")

print("\nROC areas at delta_v=0.1 (more channels = better trade-off):")
for J in (1, 3, 5):
    grid = 1.1 * chi2.ppf(np.linspace(1e-6, 1 - 1e-6, 200), J)
    print(f"  J={J}: area={roc_area(roc_curve(0.1, rho, J, grid)):.4f}")

print("\nminimum mean absolute error:")
for dv in (0.1, 0.25):
    quadrature = mmae(LimitQuery(dv, rho, 1), method="quadrature")
    monte = mmae(LimitQuery(dv, rho, 1), n_samples=200_000, seed=1)
    print(f"  delta_v={dv}: quadrature={quadrature.value:.5f}  "
          f"monte-carlo={monte.value:.5f} (+-{monte.std_err:.5f})")

print("\nMMSE curve and its inversion:")
for target_frac in (0.25, 0.5, 0.75):
    target = target_frac * rho
    dv = invert_mmse(target, rho, 1)
    print(f"  mmse target={target:.4f} -> delta_v={dv:.5f} "
          f"(round trip {mmse_of_delta(dv, rho, 1):.6f})")

print("\nstate-evolution fixed points (AWGN, delta_z=0.01):")
for R in (0.3, 0.5, 0.7):
    print(f"  R={R}: delta_v={state_evolution_delta(R, rho, 1, 0.01):.5f}")
