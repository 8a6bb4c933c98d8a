"""
Array geometry and simulated snapshots
======================================

A 10-element half-wavelength line array, two sources, and what the
projection statistics look like at and away from a source.
"""
# %%
import numpy as np
from emdoa import ArrayGeometry, Direction, projection_stats, sample_covariance
from emdoa.signals import db_to_linear, gen_stochastic, rng_stream

geom = ArrayGeometry.ula(10)
print(geom.positions[:3])

# %% two sources at 20 and 80 degrees, stochastic model
doa = np.deg2rad([20.0, 80.0])
Y = gen_stochastic(geom, doa, db_to_linear([-2.0, 4.0]), db_to_linear(4.0), T=200, rng=rng_stream(1))
Ry = sample_covariance(Y)
print(Y.shape, np.trace(Ry).real)

# %% e is large along a source, d is what is left over
for deg in (20.0, 50.0, 80.0):
    e, d = projection_stats(geom, Direction.from_degrees(90.0, deg), Ry)
    print(f"{deg:5.1f} deg  e={e:7.3f}  d={d:7.3f}")
