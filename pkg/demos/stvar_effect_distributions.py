"""
Projections recover regressions of true effects on the state
=============================================================

In a smooth transition VAR every observation carries its own marginal
effect, computable in closed form from the simulated path.  State-dependent
projections do not estimate any single one of them; they estimate the
regression of the effects on the chosen interaction features.  This script
visualizes that correspondence two ways:

* binary interaction: projection coefficients land on the subgroup means of
  the effect distributions (violin view);
* linear interaction: the projection line tracks the regression of effects
  on (1, S) through a cloud of sampled effects.

Run with::

    python demos/stvar_effect_distributions.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from statelp import (
    InteractionSpec,
    default_stvar_config,
    lp_state,
    project_effects_on_states,
    simulate_stvar,
    stvar_marginal_effects,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

config = default_stvar_config()
panel = simulate_stvar(config, 20_000, seed=1)
horizons = (0, 2, 4)
threshold = 0.8
binary = InteractionSpec.binary(threshold=threshold)
linear = InteractionSpec.linear()

fig, axes = plt.subplots(1, len(horizons), figsize=(11, 3.6), sharey=False)
rng = np.random.default_rng(0)
for ax, h in zip(axes, horizons):
    records = stvar_marginal_effects(panel, config, h)
    states = np.array([r.state_lag1 for r in records])
    values = np.array([r.value for r in records])
    groups = [values[states < threshold], values[states >= threshold]]
    est = lp_state(panel, binary, h)[h].coefficients
    oracle = project_effects_on_states(records, binary)
    print(f"h={h}: projection ({est[0]:+.4f}, {est[0] + est[1]:+.4f})  "
          f"group means ({oracle[0]:+.4f}, {oracle[0] + oracle[1]:+.4f})")
    ax.violinplot(groups, positions=[0, 1], widths=0.7, showmeans=True)
    ax.plot([0, 1], [est[0], est[0] + est[1]], "C1o-", label="projection")
    ax.set_xticks([0, 1], ["calm state", "slack state"])
    ax.set_title(f"horizon {h}")
axes[0].set_ylabel("marginal effect")
axes[0].legend()
fig.tight_layout()
fig.savefig(OUT / "stvar_binary_groups.png", dpi=150)

fig, axes = plt.subplots(1, len(horizons), figsize=(11, 3.6))
for ax, h in zip(axes, horizons):
    records = stvar_marginal_effects(panel, config, h)
    sample = rng.choice(len(records), 200, replace=False)
    states = np.array([records[i].state_lag1 for i in sample])
    values = np.array([records[i].value for i in sample])
    est = lp_state(panel, linear, h)[h].coefficients
    grid = np.linspace(states.min(), states.max(), 50)
    ax.plot(states, values, "ko", ms=2.5, alpha=0.5, label="true effects")
    ax.plot(grid, est[0] + est[1] * grid, "C1-", lw=2, label="projection line")
    ax.set_xlabel("lagged state")
    ax.set_title(f"horizon {h}")
axes[0].set_ylabel("marginal effect")
axes[0].legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "stvar_linear_fit.png", dpi=150)
print(f"wrote {OUT / 'stvar_binary_groups.png'} and {OUT / 'stvar_linear_fit.png'}")
