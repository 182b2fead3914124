"""
What a linear projection averages over
======================================

A projection of an outcome on a mean-zero shock does not weight all baseline
shock levels equally: it attaches the weight curve

    omega(x) = Cov(1[X >= x], X) / Var(X)

to the marginal effect at x.  For Gaussian shocks this curve *is* the shock
density, so the projection estimates the population average effect.  For any
other smooth shock distribution the two curves differ.  This script draws
both cases.

Run with::

    python demos/weight_curves.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import norm

from statelp import default_grid, omega_empirical

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(0)
n = 1_000_000

# Gaussian shocks: the empirical weight curve sits on top of the density.
grid = default_grid(1.0, half_width=4.0)
gauss = omega_empirical(rng.standard_normal(n), grid)
print(f"Gaussian: sup |omega - density| = "
      f"{np.max(np.abs(gauss.values - norm.pdf(grid))):.4f}")
print(f"Gaussian: integral of omega     = {gauss.integral():.4f}")

# Uniform(-1, 1) shocks: the weight curve is the parabola 3(1-x^2)/4, far
# from the flat density 0.5.
ugrid = np.round(np.arange(-1.2, 1.2 + 1e-9, 0.01), 10)
uni = omega_empirical(rng.uniform(-1, 1, n), ugrid)
parabola = np.where(np.abs(ugrid) < 1, 3 * (1 - ugrid ** 2) / 4, 0.0)
print(f"Uniform:  max |omega - parabola| = "
      f"{np.max(np.abs(uni.values - parabola)):.4f}")
inside = np.abs(ugrid) < 0.99
print(f"Uniform:  sup |omega - density|  = "
      f"{np.max(np.abs(uni.values[inside] - 0.5)):.4f}  (> 0.1: not the density)")

fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
axes[0].plot(grid, gauss.values, label="empirical weights")
axes[0].plot(grid, norm.pdf(grid), "--", label="shock density")
axes[0].set_title("Gaussian shock")
axes[0].legend()
axes[1].plot(ugrid, uni.values, label="empirical weights")
axes[1].plot(ugrid, np.where(np.abs(ugrid) <= 1, 0.5, 0.0), "--",
             label="shock density")
axes[1].plot(ugrid, parabola, ":", label="3(1-x^2)/4")
axes[1].set_title("Uniform shock")
axes[1].legend()
for ax in axes:
    ax.set_xlabel("baseline shock level x")
fig.tight_layout()
fig.savefig(OUT / "weight_curves.png", dpi=150)
print(f"wrote {OUT / 'weight_curves.png'}")
