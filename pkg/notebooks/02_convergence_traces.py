"""
One realization, three solvers
==============================

Deterministic model, sources at 20 and 80 degrees with unequal powers.
Every solver sees the same snapshots and starts from 24 and 84 degrees.
"""
# %%
import numpy as np
from emdoa import figure_config, run_solver, simulate

cfg = figure_config("fig1")
Y = simulate(cfg, 0)

# %%
for solver in cfg.solvers:
    res = run_solver(cfg, Y, solver)
    L = np.array(res.loglik_trace)
    print(f"{solver:9s} iterations={res.iterations:3d}  final={np.round(res.azimuths_deg, 3)}"
          f"  monotone={bool(np.all(np.diff(L) >= -1e-8 * np.abs(L[1:])))}")

# %% first few iterates of SAGE
res = run_solver(cfg, Y, "sage-det")
for k, (th, L) in enumerate(zip(res.theta_trace, res.loglik_trace)):
    print(k, np.round(th, 4), round(L, 3))
