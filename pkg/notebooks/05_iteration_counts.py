"""
Iteration counts on shared samples
==================================

Stochastic-model data processed by EM and SAGE under both signal models,
same samples and starting point for all four.
"""
# %%
import numpy as np
from emdoa import figure_config, monte_carlo

mc = monte_carlo(figure_config("fig8"))
order = ["em-det", "em-sto", "sage-det", "sage-sto"]
counts = np.array([[run[s].iterations for s in order] for run in mc.runs])

# %%
print("mean", {s: round(float(v), 2) for s, v in zip(order, counts.mean(0))})
print("sage-det at the minimum:", int(np.sum(counts[:, 2] <= counts.min(1))), "of", len(counts))
print("sage-sto strictly fewer than sage-det:", int(np.sum(counts[:, 3] < counts[:, 2])))
