"""EM for the deterministic model and ECM-split EM for the stochastic model.

The noise is split among the sources with fixed weights ``alpha`` summing to
one.  Both variants are generalized EM: the direction M-step is a warm-started
local ascent rather than a global maximization, which still makes the
incomplete-data likelihood non-decreasing.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ._core import (det_complete_data, scatter, source_covariances, stats_at,
                    sto_conditional_scatter, update_direction)
from .geometry import HALF_PI, ArrayGeometry, steering_matrix
from .search import LineSearchParams


def check_alpha(alpha, M: int) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (M,):
        raise ValueError(f"alpha must have {M} entries")
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be positive")
    if abs(alpha.sum() - 1.0) > 1e-12:
        raise ValueError("alpha must sum to one")
    return alpha


def uniform_alpha(M: int) -> np.ndarray:
    return np.full(M, 1.0 / M)


@dataclass
class EmDetState:
    azimuths: np.ndarray
    signals: np.ndarray
    sigma: float
    iteration: int = 0
    loglik_trace: list = field(default_factory=list)
    capped_searches: int = 0


@dataclass
class EmStoState:
    azimuths: np.ndarray
    powers: np.ndarray
    sigma: float
    iteration: int = 0
    loglik_trace: list = field(default_factory=list)
    capped_searches: int = 0


class DetEStep(NamedTuple):
    x: np.ndarray   # (M, N, T) conditional means of the complete data
    R: np.ndarray   # (M, N, N) their scatter matrices
    c: float        # trace of the conditional covariance term


def em_det_estep(Y, state: EmDetState, alpha, geom: ArrayGeometry,
                 elevation=HALF_PI) -> DetEStep:
    Y = np.atleast_2d(Y)
    M = state.azimuths.size
    alpha = check_alpha(alpha, M)
    A = steering_matrix(geom, state.azimuths, elevation)
    x = det_complete_data(Y, A, state.signals, alpha)
    c = geom.n_sensors * (M - 1) * state.sigma
    return DetEStep(x, scatter(x), c)


def em_det_mstep(estep: DetEStep, state: EmDetState, alpha, geom: ArrayGeometry,
                 search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> EmDetState:
    M = state.azimuths.size
    N = geom.n_sensors
    alpha = check_alpha(alpha, M)
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
    sigma = (1.0 - 1.0 / M) * state.sigma + np.sum(d / alpha) / (M * N)
    return replace(state, azimuths=azimuths, signals=signals, sigma=float(sigma),
                   iteration=state.iteration + 1,
                   capped_searches=state.capped_searches + capped)


def em_det_iteration(Y, state: EmDetState, alpha, geom: ArrayGeometry,
                     search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> EmDetState:
    estep = em_det_estep(Y, state, alpha, geom, elevation)
    return em_det_mstep(estep, state, alpha, geom, search, elevation)


def em_sto_estep(Ry, state: EmStoState, alpha, geom: ArrayGeometry, elevation=HALF_PI) -> np.ndarray:
    """Conditional expectations of the per-source scatter matrices, shape (M, N, N)."""
    alpha = check_alpha(alpha, state.azimuths.size)
    A = steering_matrix(geom, state.azimuths, elevation)
    C_m = source_covariances(A, state.powers, alpha * state.sigma)
    return sto_conditional_scatter(Ry, C_m, C_m.sum(axis=0))


def em_sto_mstep(R, state: EmStoState, alpha, geom: ArrayGeometry,
                 search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> EmStoState:
    """First CM-step (directions and powers at fixed sigma), then the sigma CM-step."""
    M = state.azimuths.size
    N = geom.n_sensors
    alpha = check_alpha(alpha, M)
    sigma_old = state.sigma
    azimuths = np.empty(M)
    powers = np.empty(M)
    noise_terms = np.empty(M)
    capped = 0
    for m in range(M):
        upd = update_direction(geom, R[m], state.azimuths[m], search, elevation)
        capped += upd.capped
        p = max((upd.e - alpha[m] * sigma_old) / N, 0.0)
        if p > 0:
            azimuths[m] = upd.azimuth
            # Tr{D_m^-1 R_m} at the optimal SNR r_m = p / sigma_old
            noise_terms[m] = upd.d / alpha[m] + sigma_old
        else:
            # zero power leaves the direction undetermined: keep the old one
            azimuths[m] = state.azimuths[m]
            _, _, tr = stats_at(geom, R[m], azimuths[m], elevation)
            noise_terms[m] = tr / alpha[m]
        powers[m] = p
    sigma = noise_terms.sum() / (M * N)
    return replace(state, azimuths=azimuths, powers=powers, sigma=float(sigma),
                   iteration=state.iteration + 1,
                   capped_searches=state.capped_searches + capped)


def em_sto_iteration(Ry, state: EmStoState, alpha, geom: ArrayGeometry,
                     search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> EmStoState:
    R = em_sto_estep(Ry, state, alpha, geom, elevation)
    return em_sto_mstep(R, state, alpha, geom, search, elevation)
