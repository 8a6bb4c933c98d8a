"""Incomplete-data log-likelihoods for the deterministic and stochastic models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .geometry import HALF_PI, ArrayGeometry, steering_matrix

# floor applied to sigma inside log() only; sigma = 0 is a legal SAGE-det iterate
SIGMA_LOG_FLOOR = 1e-300


@dataclass
class DetParams:
    azimuths: np.ndarray
    signals: np.ndarray
    sigma: float


@dataclass
class StoParams:
    azimuths: np.ndarray
    powers: np.ndarray
    sigma: float


def residual_power(Y, geom: ArrayGeometry, azimuths, S, elevation=HALF_PI) -> float:
    """(1/T) sum_t ||y(t) - A(theta) s(t)||^2, the sigma-free deterministic objective."""
    Y = np.atleast_2d(Y)
    resid = Y - steering_matrix(geom, azimuths, elevation) @ np.atleast_2d(S)
    return float(np.vdot(resid, resid).real) / Y.shape[1]


def loglik_det(Y, params: DetParams, geom: ArrayGeometry, elevation=HALF_PI) -> float:
    """-TN ln(pi sigma) - (1/sigma) sum_t ||y(t) - A s(t)||^2."""
    if params.sigma < 0:
        raise ValueError("sigma must be nonnegative")
    Y = np.atleast_2d(Y)
    N, T = Y.shape
    sse = T * residual_power(Y, geom, params.azimuths, params.signals, elevation)
    sigma = max(float(params.sigma), SIGMA_LOG_FLOOR)
    return -T * N * np.log(np.pi * sigma) - sse / sigma


def build_cov(geom: ArrayGeometry, azimuths, powers, sigma: float, elevation=HALF_PI) -> np.ndarray:
    """C_y = sum_m P_m a_m a_m^H + sigma I."""
    A = steering_matrix(geom, azimuths, elevation)
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    C = (A * powers) @ A.conj().T
    C = 0.5 * (C + C.conj().T)
    C[np.diag_indices_from(C)] += sigma
    return C


def loglik_cov(Ry, C, T: int) -> float:
    """-TN ln pi - T ln|C| - T Tr{C^-1 Ry} via a Cholesky factorization."""
    N = C.shape[0]
    try:
        fac = cho_factor(C, lower=True)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("model covariance is not positive definite") from None
    logdet = 2.0 * np.sum(np.log(np.diag(fac[0]).real))
    quad = np.trace(cho_solve(fac, Ry)).real
    return float(-T * N * np.log(np.pi) - T * logdet - T * quad)


def loglik_sto(Ry, params: StoParams, geom: ArrayGeometry, T: int, elevation=HALF_PI) -> float:
    if not params.sigma > 0:
        raise ValueError("sigma must be positive")
    C = build_cov(geom, params.azimuths, params.powers, params.sigma, elevation)
    return loglik_cov(Ry, C, T)
