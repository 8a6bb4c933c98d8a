"""Seeded snapshot simulation for both signal models, plus snapshot I/O."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .geometry import HALF_PI, ArrayGeometry, steering_matrix


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for realization ``index`` under a master seed.

    The same (seed, index) pair always reproduces the same draws.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """CN(0, variance) draws: independent real/imag parts with variance/2 each.

    ``variance`` broadcasts against ``shape``.
    """
    scale = np.sqrt(0.5 * np.asarray(variance, dtype=float))
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return scale * z


def _check_dims(geom, azimuths, n_rows):
    azim = np.atleast_1d(np.asarray(azimuths, dtype=float))
    if azim.ndim != 1 or azim.size != n_rows:
        raise ValueError(f"{azim.size} directions but {n_rows} source rows")
    return azim


def gen_deterministic(geom: ArrayGeometry, azimuths, S, sigma: float,
                      rng: np.random.Generator, elevation=HALF_PI) -> np.ndarray:
    """Y = A(theta) S + W with W ~ CN(0, sigma I)."""
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    azim = _check_dims(geom, azimuths, S.shape[0])
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    A = steering_matrix(geom, azim, elevation)
    W = complex_normal(rng, (geom.n_sensors, S.shape[1]), sigma)
    return A @ S + W


def draw_signals(rng: np.random.Generator, powers, T: int) -> np.ndarray:
    """Source waveforms s_m(t) ~ CN(0, P_m), shape M x T."""
    powers = np.asarray(powers, dtype=float)
    if np.any(powers < 0):
        raise ValueError("source powers must be nonnegative")
    return complex_normal(rng, (powers.size, T), powers[:, None])


def gen_stochastic(geom: ArrayGeometry, azimuths, powers, sigma: float, T: int,
                   rng: np.random.Generator, elevation=HALF_PI) -> np.ndarray:
    """T i.i.d. columns from CN(0, sum_m P_m a_m a_m^H + sigma I)."""
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    _check_dims(geom, azimuths, powers.size)
    if not sigma > 0:
        raise ValueError("sigma must be positive for the stochastic model")
    if T < 1:
        raise ValueError("T must be at least 1")
    S = draw_signals(rng, powers, T)
    return gen_deterministic(geom, azimuths, S, sigma, rng, elevation)


def sample_covariance(Y) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y))
    if Y.shape[1] < 1:
        raise ValueError("need at least one snapshot")
    R = (Y @ Y.conj().T) / Y.shape[1]
    return 0.5 * (R + R.conj().T)


# --- snapshot exchange formats ------------------------------------------------
# CSV: one row per sensor, columns re(y(1)), im(y(1)), re(y(2)), ...
# JSON: {"n_sensors": N, "n_snapshots": T, "real": [[...]], "imag": [[...]]}


def save_snapshots_csv(Y, path: str | Path) -> None:
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    inter = np.empty((Y.shape[0], 2 * Y.shape[1]))
    inter[:, 0::2] = Y.real
    inter[:, 1::2] = Y.imag
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in inter:
            writer.writerow([repr(float(v)) for v in row])


def load_snapshots_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    inter = np.asarray(rows, dtype=float)
    if inter.ndim != 2 or inter.shape[1] % 2:
        raise ValueError("snapshot CSV needs an even number of columns (re/im pairs)")
    Y = inter[:, 0::2] + 1j * inter[:, 1::2]
    if not np.all(np.isfinite(Y)):
        raise ValueError("snapshot CSV contains non-finite entries")
    return Y


def save_snapshots_json(Y, path: str | Path) -> None:
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    doc = {"n_sensors": Y.shape[0], "n_snapshots": Y.shape[1],
           "real": Y.real.tolist(), "imag": Y.imag.tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_snapshots_json(path: str | Path) -> np.ndarray:
    with open(path) as fh:
        doc = json.load(fh)
    Y = np.asarray(doc["real"], dtype=float) + 1j * np.asarray(doc["imag"], dtype=float)
    Y = np.atleast_2d(Y)
    if "n_sensors" in doc and Y.shape != (doc["n_sensors"], doc["n_snapshots"]):
        raise ValueError("snapshot JSON shape does not match its header")
    return Y


def load_snapshots(path: str | Path) -> np.ndarray:
    if str(path).endswith(".json"):
        return load_snapshots_json(path)
    return load_snapshots_csv(path)


def save_snapshots(Y, path: str | Path) -> None:
    if str(path).endswith(".json"):
        save_snapshots_json(Y, path)
    else:
        save_snapshots_csv(Y, path)
