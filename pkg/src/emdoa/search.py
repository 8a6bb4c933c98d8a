"""Azimuth maximization of a^H(phi) R a(phi).

Every M-step of the EM/MEM/SAGE solvers reduces to ``argmax_phi Tr{Pi(phi) R}``
for a surrogate covariance R.  The search is a gradient ascent with
backtracking, started at the previous iterate so the objective never
decreases between solver iterations.  Elevation is held fixed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import HALF_PI, ArrayGeometry


@dataclass(frozen=True)
class LineSearchParams:
    rho: float = 0.1
    eta: float = 0.3
    gamma: float = 0.5
    tol: float = 1e-3
    max_gradient_steps: int = 500
    max_halvings: int = 100

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.eta < 0.5:
            raise ValueError("eta must lie in (0, 0.5)")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_gradient_steps < 1 or self.max_halvings < 1:
            raise ValueError("iteration caps must be positive")


class AscentResult(NamedTuple):
    azimuth: float
    value: float
    steps: int
    capped: bool


class AzimuthObjective:
    """g(phi) = a(phi)^H R a(phi) and its analytic derivative for one R.

    Precomputes the per-sensor projections so repeated evaluations inside
    the line search stay cheap.
    """

    def __init__(self, geom: ArrayGeometry, R: np.ndarray, elevation: float = HALF_PI):
        self.R = np.asarray(R)
        k = geom.wavenumber
        sin_el = np.sin(elevation)
        # psi_n(phi) = -k sin(el) (x_n cos phi + y_n sin phi) - k cos(el) z_n
        self._cx = -k * sin_el * geom.positions[:, 0]
        self._cy = -k * sin_el * geom.positions[:, 1]
        self._c0 = -k * np.cos(elevation) * geom.positions[:, 2]

    def _phase(self, phi):
        if np.ndim(phi) == 0:
            return self._cx * np.cos(phi) + self._cy * np.sin(phi) + self._c0
        return (np.multiply.outer(self._cx, np.cos(phi))
                + np.multiply.outer(self._cy, np.sin(phi)) + self._c0[:, None])

    def value(self, phi):
        """g at a scalar angle or at an array of angles."""
        a = np.exp(1j * self._phase(phi))
        if a.ndim == 1:
            return float((a.conj() @ self.R @ a).real)
        return np.einsum("nk,nk->k", a.conj(), self.R @ a).real

    def value_and_grad(self, phi: float) -> tuple[float, float]:
        a = np.exp(1j * self._phase(phi))
        dpsi = -self._cx * np.sin(phi) + self._cy * np.cos(phi)
        Ra = self.R @ a
        g = (a.conj() @ Ra).real
        # d/dphi a^H R a = 2 Re{(da)^H R a}, da = j dpsi * a
        gp = 2.0 * ((-1j * dpsi * a.conj()) @ Ra).real
        return float(g), float(gp)


def objective_and_gradient(geom: ArrayGeometry, R, azimuth: float,
                           elevation: float = HALF_PI) -> tuple[float, float]:
    """Return (g, dg/dphi) with g = a^H(phi) R a(phi) = N Tr{Pi(phi) R}."""
    return AzimuthObjective(geom, R, elevation).value_and_grad(azimuth)


_CHUNK = 24


def ascend(geom: ArrayGeometry, R, azim_init: float,
           params: LineSearchParams = LineSearchParams(),
           elevation: float = HALF_PI, objective: AzimuthObjective | None = None) -> AscentResult:
    """Gradient ascent with backtracking line search on (0, pi).

    The first trial step moves a fraction ``rho`` of the way towards the
    boundary the gradient points at; it is shrunk by ``gamma`` until the
    Armijo condition ``g(phi + t g') >= g(phi) + eta t g'^2`` holds.  If no
    trial step within ``max_halvings`` shrinks is accepted the current point
    is returned as stationary.
    """
    phi = float(azim_init)
    if not 0.0 < phi < np.pi:
        raise ValueError(f"initial azimuth {phi!r} is outside (0, pi)")
    obj = objective if objective is not None else AzimuthObjective(geom, R, elevation)
    g, gp = obj.value_and_grad(phi)
    shrink = params.gamma ** np.arange(params.max_halvings + 1)
    steps = 0
    while abs(gp) > params.tol:
        if steps >= params.max_gradient_steps:
            return AscentResult(phi, g, steps, True)
        t0 = params.rho * ((np.pi - phi) if gp > 0 else -phi) / gp
        accepted = None
        # trial steps are evaluated in blocks; the first acceptable one wins,
        # exactly as the sequential backtracking loop would pick it
        for start in range(0, shrink.size, _CHUNK):
            ts = t0 * shrink[start:start + _CHUNK]
            trial = phi + ts * gp
            ok = obj.value(trial) >= g + params.eta * ts * gp * gp
            if ok.any():
                accepted = trial[np.argmax(ok)]
                break
        if accepted is None:
            break
        phi = float(accepted)
        assert 0.0 < phi < np.pi, "line search left (0, pi)"
        g, gp = obj.value_and_grad(phi)
        steps += 1
    return AscentResult(phi, g, steps, False)


def grid_init(geom: ArrayGeometry, R, resolution: float, elevation: float = HALF_PI) -> float:
    """Grid point in (0, pi) with the largest objective; ties go to the smallest angle."""
    if not 0 < resolution < np.pi:
        raise ValueError("resolution must lie in (0, pi)")
    grid = resolution * np.arange(1, int(np.ceil(np.pi / resolution)))
    grid = grid[grid < np.pi]
    vals = AzimuthObjective(geom, R, elevation).value(grid)
    top = vals.max()
    # float noise must not break ties on flat objectives
    tied = vals >= top - 1e-12 * max(abs(top), 1.0)
    return float(grid[np.argmax(tied)])
