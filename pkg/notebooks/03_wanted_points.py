"""
How often does each solver land on the right pair of directions?
================================================================

A short Monte Carlo at the closely spaced setting (70 and 78 degrees,
started at 50 and 58).  Raise ``realizations`` to 200 for the full run.
"""
# %%
from emdoa import figure_config, monte_carlo

cfg = figure_config("fig3", realizations=25)
mc = monte_carlo(cfg)

# %%
for solver, s in mc.summary.items():
    print(f"{solver:9s} wanted {s['wanted']:3d}/{s['realizations']}  "
          f"mean iterations {s['mean_iterations']:.1f}  capped {s['capped']}")
