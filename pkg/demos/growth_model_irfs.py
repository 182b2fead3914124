"""
State-dependent projections vs VAR impulse responses
====================================================

A two-state growth model with exogenous Markov switching admits an exact
conditional impulse response (enumerating future state paths), which makes
it a clean test bed for comparing five estimands:

* ``TRUE``           the exact conditional effect,
* ``LP``             state-interacted projections,
* ``VAR_FIXED``      one state-dependent VAR, state held fixed,
* ``VAR_MOVING``     one state-dependent VAR, lag matrices averaged over
                     future state paths with the known chain,
* ``VAR_BACKSHIFT``  a composite of VARs whose conditioning state shifts
                     back one lag per horizon.

Projections track the truth; so does the backshifted composite.  The two
single-model VAR constructions do not: holding the state fixed exaggerates
the gap between states, and even the correctly path-averaged response stays
away from the projection estimand at short horizons.

Runs in about a minute::

    python demos/growth_model_irfs.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from statelp import DsgeConfig, solve_dsge_savings
from statelp.estimators import LP, TRUE, UNCONDITIONAL, VAR_BACKSHIFT, VAR_FIXED, VAR_MOVING
from statelp.experiments import ExperimentConfig, run_experiment

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

config = DsgeConfig()
phi0, phi1, resid = solve_dsge_savings(config)
print(f"savings rates: expansion {phi0:.4f}, recession {phi1:.4f} "
      f"(optimality residual {resid:.1e})")

# quick-look Monte Carlo: 6 replications of 50k observations, 12-lag VARs.
# This is below the calibrated scale of the acceptance suite, so the
# separation statistics are reported with their uncertainty instead of a
# pass/fail verdict (run tests/test_acceptance.py for the calibrated run).
summary = run_experiment(
    ExperimentConfig(
        "dsge_irf",
        params={"var_lags": 12},
        replications=6,
        sample_size=50_000,
        horizons=8,
        seed=42,
        outdir=str(OUT / "dsge_irf"),
    )
)
for name, metric in sorted(summary.metrics.items()):
    print(f"  {name}: {metric.value:+.4f} (mc_se {metric.mc_se:.4f})")

# plot the per-state curves from the emitted CSV
rows = np.genfromtxt(
    OUT / "dsge_irf" / "irf.csv", delimiter=",", names=True, dtype=None,
    encoding="utf-8",
)
fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
titles = {"1": "after a recession", "0": "after an expansion",
          UNCONDITIONAL: "unconditional"}
styles = {TRUE: "k-", LP: "C0o-", VAR_FIXED: "C1^--", VAR_MOVING: "C2s--",
          VAR_BACKSHIFT: "C3x-"}
for ax, state in zip(axes, ("1", "0", UNCONDITIONAL)):
    for label, style in styles.items():
        mask = (rows["state"] == state) & (rows["estimator"] == label)
        ax.plot(rows["h"][mask], rows["value"][mask], style, label=label, ms=4)
    ax.set_title(titles[state])
    ax.set_xlabel("horizon")
axes[0].set_ylabel("effect of a unit shock on income")
axes[0].legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "growth_model_irfs.png", dpi=150)
print(f"wrote {OUT / 'growth_model_irfs.png'}")
