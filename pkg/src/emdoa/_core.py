"""Pieces shared by the EM, MEM and SAGE solvers."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .geometry import ArrayGeometry, _stats, steering_matrix
from .search import LineSearchParams, ascend


class DirectionUpdate(NamedTuple):
    azimuth: float
    e: float
    d: float
    trace: float
    capped: bool


def hermitize(R: np.ndarray) -> np.ndarray:
    return 0.5 * (R + np.swapaxes(R, -1, -2).conj())


def update_direction(geom: ArrayGeometry, R: np.ndarray, phi_old: float,
                     search: LineSearchParams, elevation: float) -> DirectionUpdate:
    """Warm-started maximization of Tr{Pi(phi) R} plus the e/d statistics there."""
    res = ascend(geom, R, phi_old, search, elevation)
    a = steering_matrix(geom, res.azimuth, elevation)[:, 0]
    e, d, tr = _stats(a, R)
    return DirectionUpdate(res.azimuth, e, d, tr, res.capped)


def stats_at(geom: ArrayGeometry, R: np.ndarray, phi: float, elevation: float):
    a = steering_matrix(geom, phi, elevation)[:, 0]
    return _stats(a, R)


def scatter(x: np.ndarray) -> np.ndarray:
    """Stack of (1/T) X_m X_m^H for x of shape (M, N, T)."""
    T = x.shape[-1]
    return hermitize(np.einsum("mnt,mkt->mnk", x, x.conj()) / T)


def det_complete_data(Y, A, S, weights) -> np.ndarray:
    """x_m(t) = w_m [y(t) - A s(t)] + a_m s_m(t), returned with shape (M, N, T)."""
    resid = Y - A @ S
    return (np.asarray(weights, dtype=float)[:, None, None] * resid[None]
            + A.T[:, :, None] * S[:, None, :])


def source_covariances(A, powers, noise) -> np.ndarray:
    """C_m = P_m a_m a_m^H + noise_m I, shape (M, N, N)."""
    powers = np.asarray(powers, dtype=float)
    noise = np.broadcast_to(np.asarray(noise, dtype=float), powers.shape)
    N = A.shape[0]
    C = powers[:, None, None] * np.einsum("nm,km->mnk", A, A.conj())
    C = C + noise[:, None, None] * np.eye(N)
    return hermitize(C)


def sto_conditional_scatter(Ry, C_m, C_y) -> np.ndarray:
    """E{R_m | Y} = C_m C_y^-1 Ry C_y^-1 C_m + C_m - C_m C_y^-1 C_m for a stack of C_m."""
    fac = cho_factor(C_y, lower=True)
    out = np.empty_like(C_m)
    for m, C in enumerate(C_m):
        G = cho_solve(fac, C)  # C_y^-1 C_m; its conjugate transpose is C_m C_y^-1
        out[m] = G.conj().T @ Ry @ G + C - C @ G
    return hermitize(out)
