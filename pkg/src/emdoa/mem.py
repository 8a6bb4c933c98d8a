"""Modified EM: per-source noise variances sigma_m are estimated alongside theta.

The total noise variance is sigma = sum_m sigma_m and the implied split is
alpha_m = sigma_m / sigma.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._core import (det_complete_data, scatter, source_covariances,
                    sto_conditional_scatter, update_direction)
from .em import DetEStep
from .geometry import HALF_PI, ArrayGeometry, steering_matrix
from .search import LineSearchParams


def check_sigmas(sigmas) -> np.ndarray:
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.ndim != 1 or np.any(~(sigmas > 0)):
        raise ValueError(f"per-source noise variances must all be positive, got {sigmas}")
    return sigmas


@dataclass
class MemDetState:
    azimuths: np.ndarray
    signals: np.ndarray
    sigmas: np.ndarray
    iteration: int = 0
    loglik_trace: list = field(default_factory=list)
    capped_searches: int = 0

    @property
    def sigma(self) -> float:
        return float(np.sum(self.sigmas))

    @property
    def alpha(self) -> np.ndarray:
        return self.sigmas / self.sigmas.sum()


@dataclass
class MemStoState:
    azimuths: np.ndarray
    powers: np.ndarray
    sigmas: np.ndarray
    iteration: int = 0
    loglik_trace: list = field(default_factory=list)
    capped_searches: int = 0

    @property
    def sigma(self) -> float:
        return float(np.sum(self.sigmas))

    @property
    def alpha(self) -> np.ndarray:
        return self.sigmas / self.sigmas.sum()


def mem_det_estep(Y, state: MemDetState, geom: ArrayGeometry, elevation=HALF_PI) -> DetEStep:
    """Returns the complete-data means/scatters and the per-source c_m vector."""
    Y = np.atleast_2d(Y)
    sigmas = check_sigmas(state.sigmas)
    ratio = sigmas / sigmas.sum()
    A = steering_matrix(geom, state.azimuths, elevation)
    x = det_complete_data(Y, A, state.signals, ratio)
    c = geom.n_sensors * sigmas * (1.0 - ratio)
    return DetEStep(x, scatter(x), c)


def mem_det_mstep(estep: DetEStep, state: MemDetState, geom: ArrayGeometry,
                  search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> MemDetState:
    M = state.azimuths.size
    N = geom.n_sensors
    sigmas_old = check_sigmas(state.sigmas)
    azimuths = np.empty(M)
    signals = np.empty(state.signals.shape, dtype=complex)
    d = np.empty(M)
    capped = 0
    for m in range(M):
        upd = update_direction(geom, estep.R[m], state.azimuths[m], search, elevation)
        azimuths[m], d[m] = upd.azimuth, upd.d
        capped += upd.capped
        a = steering_matrix(geom, upd.azimuth, elevation)[:, 0]
        signals[m] = a.conj() @ estep.x[m] / N
    sigmas = sigmas_old * (1.0 - sigmas_old / sigmas_old.sum()) + d / N
    return replace(state, azimuths=azimuths, signals=signals, sigmas=sigmas,
                   iteration=state.iteration + 1,
                   capped_searches=state.capped_searches + capped)


def mem_det_iteration(Y, state: MemDetState, geom: ArrayGeometry,
                      search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> MemDetState:
    estep = mem_det_estep(Y, state, geom, elevation)
    return mem_det_mstep(estep, state, geom, search, elevation)


def mem_sto_estep(Ry, state: MemStoState, geom: ArrayGeometry, elevation=HALF_PI) -> np.ndarray:
    A = steering_matrix(geom, state.azimuths, elevation)
    C_m = source_covariances(A, state.powers, check_sigmas(state.sigmas))
    return sto_conditional_scatter(Ry, C_m, C_m.sum(axis=0))


def mem_sto_source_update(R_m, phi_old, geom, search, elevation):
    """Closed-form (theta, sigma_m, P_m) for one source; also reports the search cap flag.

    The concentrated cost is decreasing in e only where e > Tr{R}/N; outside
    that set the power is zero and the direction is kept.
    """
    N = geom.n_sensors
    upd = update_direction(geom, R_m, phi_old, search, elevation)
    floor = upd.trace / N
    if upd.e > floor:
        return upd.azimuth, upd.d / (N - 1), (upd.e - floor) / (N - 1), upd.capped
    return float(phi_old), floor, 0.0, upd.capped


def mem_sto_mstep(R, state: MemStoState, geom: ArrayGeometry,
                  search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> MemStoState:
    M = state.azimuths.size
    azimuths, sigmas, powers = np.empty(M), np.empty(M), np.empty(M)
    capped = 0
    for m in range(M):
        azimuths[m], sigmas[m], powers[m], cap = mem_sto_source_update(
            R[m], state.azimuths[m], geom, search, elevation)
        capped += cap
    return replace(state, azimuths=azimuths, powers=powers, sigmas=sigmas,
                   iteration=state.iteration + 1,
                   capped_searches=state.capped_searches + capped)


def mem_sto_iteration(Ry, state: MemStoState, geom: ArrayGeometry,
                      search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> MemStoState:
    R = mem_sto_estep(Ry, state, geom, elevation)
    return mem_sto_mstep(R, state, geom, search, elevation)
