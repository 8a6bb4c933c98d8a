"""SAGE: one source per sub-step, all noise attributed to the active source.

Sources are visited in ascending order; one iteration is M sub-steps.  The
deterministic variant needs only the data; the stochastic variant also
re-estimates the powers of the inactive sources from their conditional
sufficient statistics and falls back to two conditional-maximization steps
whenever the closed-form noise estimate collapses to zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._core import (scatter, source_covariances, stats_at,
                    sto_conditional_scatter, update_direction)
from .geometry import HALF_PI, ArrayGeometry, steering_matrix
from .likelihood import build_cov
from .search import LineSearchParams

# relative threshold on Tr{R_i} below which a noise estimate counts as zero
ZERO_SIGMA_RTOL = 1e-14


@dataclass
class SageDetState:
    azimuths: np.ndarray
    signals: np.ndarray
    sigma: float
    iteration: int = 0
    substep: int = 0
    loglik_trace: list = field(default_factory=list)
    substep_trace: list = field(default_factory=list)
    capped_searches: int = 0


@dataclass
class SageStoState:
    azimuths: np.ndarray
    powers: np.ndarray
    sigma: float
    phat: np.ndarray | None = None
    iteration: int = 0
    substep: int = 0
    loglik_trace: list = field(default_factory=list)
    substep_trace: list = field(default_factory=list)
    capped_searches: int = 0
    fallbacks: int = 0


def sage_det_estep(Y, state: SageDetState, i: int, geom: ArrayGeometry, elevation=HALF_PI):
    """x_i(t) = y(t) - sum_{m != i} a_m s_m(t); returns (x_i, R_i)."""
    Y = np.atleast_2d(Y)
    A = steering_matrix(geom, state.azimuths, elevation)
    x = Y - A @ state.signals + np.outer(A[:, i], state.signals[i])
    return x, scatter(x[None])[0]


def sage_det_substep(Y, state: SageDetState, i: int, geom: ArrayGeometry,
                     search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> SageDetState:
    N = geom.n_sensors
    x, R = sage_det_estep(Y, state, i, geom, elevation)
    upd = update_direction(geom, R, state.azimuths[i], search, elevation)
    a = steering_matrix(geom, upd.azimuth, elevation)[:, 0]
    azimuths = state.azimuths.copy()
    signals = state.signals.astype(complex)
    azimuths[i] = upd.azimuth
    signals[i] = a.conj() @ x / N
    sigma = upd.d / N
    trace = state.substep_trace + [{"k": state.iteration + 1, "i": i + 1,
                                    "azimuths": azimuths.copy(), "sigma": sigma}]
    return replace(state, azimuths=azimuths, signals=signals, sigma=float(sigma),
                   substep=i + 1, substep_trace=trace,
                   capped_searches=state.capped_searches + upd.capped)


def sufficient_powers(Ry, A, powers, C_y) -> np.ndarray:
    """E{(1/T) sum_t |s_m(t)|^2 | Y} for every source under covariance C_y.

    P_m [1 - a_m^H b_m] + b_m^H Ry b_m with b_m = C_y^-1 a_m P_m.
    """
    fac = cho_factor(C_y, lower=True)
    B = cho_solve(fac, A) * np.asarray(powers, dtype=float)
    ab = np.einsum("nm,nm->m", A.conj(), B).real
    bRb = np.einsum("nm,nm->m", B.conj(), Ry @ B).real
    return np.maximum(powers * (1.0 - ab) + bRb, 0.0)


def sage_sto_estep(Ry, state: SageStoState, i: int, geom: ArrayGeometry, elevation=HALF_PI):
    """Returns (R_i, phat) where phat[m] for m != i are the conditional power statistics."""
    A = steering_matrix(geom, state.azimuths, elevation)
    C_y = build_cov(geom, state.azimuths, state.powers, state.sigma, elevation)
    phat = sufficient_powers(Ry, A, state.powers, C_y)
    C_i = source_covariances(A[:, i:i + 1], state.powers[i:i + 1], state.sigma)
    R_i = sto_conditional_scatter(Ry, C_i, C_y)[0]
    return R_i, phat


def sage_sto_substep(Ry, state: SageStoState, i: int, geom: ArrayGeometry,
                     search: LineSearchParams = LineSearchParams(), elevation=HALF_PI) -> SageStoState:
    N = geom.n_sensors
    sigma_old = state.sigma
    R_i, phat = sage_sto_estep(Ry, state, i, geom, elevation)
    upd = update_direction(geom, R_i, state.azimuths[i], search, elevation)
    floor = upd.trace / N
    if upd.e > floor:
        phi, sigma, p_i = upd.azimuth, upd.d / (N - 1), (upd.e - floor) / (N - 1)
    else:
        phi, sigma, p_i = state.azimuths[i], floor, 0.0

    fallback = sigma <= ZERO_SIGMA_RTOL * upd.trace
    if fallback:
        # CM-step 1 at sigma_old, then CM-step 2 for sigma at the resulting SNR
        p_i = max((upd.e - sigma_old) / N, 0.0)
        if p_i > 0:
            phi, d = upd.azimuth, upd.d
        else:
            phi = state.azimuths[i]
            _, d, _ = stats_at(geom, R_i, phi, elevation)
        snr = p_i / sigma_old
        sigma = (sigma_old + d) / N
        p_i = snr * sigma

    azimuths = state.azimuths.copy()
    azimuths[i] = phi
    powers = phat.copy()
    powers[i] = p_i
    phat = phat.copy()
    phat[i] = np.nan
    trace = state.substep_trace + [{"k": state.iteration + 1, "i": i + 1,
                                    "azimuths": azimuths.copy(), "sigma": float(sigma),
                                    "powers": powers.copy(), "fallback": bool(fallback)}]
    return replace(state, azimuths=azimuths, powers=powers, sigma=float(sigma), phat=phat,
                   substep=i + 1, substep_trace=trace,
                   capped_searches=state.capped_searches + upd.capped,
                   fallbacks=state.fallbacks + int(fallback))


def sage_iteration(data, state, geom: ArrayGeometry,
                   search: LineSearchParams = LineSearchParams(), elevation=HALF_PI):
    """One full sweep over the sources in ascending order.

    ``data`` is the snapshot matrix Y for a :class:`SageDetState` and the
    sample covariance for a :class:`SageStoState`.
    """
    substep = sage_det_substep if isinstance(state, SageDetState) else sage_sto_substep
    for i in range(state.azimuths.size):
        state = substep(data, state, i, geom, search, elevation)
    return replace(state, iteration=state.iteration + 1, substep=0)
