"""
Stochastic model solvers and the zero-noise fallback
====================================================
"""
# %%
import numpy as np
from emdoa import ArrayGeometry, SageStoState, figure_config, run_solver, simulate, steering_matrix
from emdoa.sage import sage_sto_substep
from emdoa.signals import sample_covariance

cfg = figure_config("fig4")
Y = simulate(cfg, 0)
for solver in cfg.solvers:
    res = run_solver(cfg, Y, solver)
    print(f"{solver:9s} {res.iterations:3d} iterations -> {np.round(res.azimuths_deg, 3)}"
          f"  sigma={res.sigma_trace[-1]:.3f}")

# %% a single snapshot sitting exactly on a steering vector drives the
# closed-form noise estimate to zero; the two-step fallback keeps it positive
geom = ArrayGeometry.ula(10)
y = (1.0 + 0.5j) * steering_matrix(geom, np.deg2rad(70.0))
state = SageStoState(np.deg2rad([30.0, 71.0]), np.array([0.0, 1.0]), 1.0)
state = sage_sto_substep(sample_covariance(y), state, 1, geom)
print(state.substep_trace[-1])
