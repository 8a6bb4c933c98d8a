"""Array geometry, steering vectors and projection statistics.

Angles are in radians everywhere in this module.  The origin is the phase
reference of the array.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

HALF_PI = 0.5 * np.pi
HERMITIAN_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Sensor positions (N x 3) and carrier wavelength, same length unit."""

    positions: np.ndarray
    wavelength: float

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be N x 3, got shape {pos.shape}")
        if pos.shape[0] < 2:
            raise ValueError("an array needs at least 2 sensors")
        if not np.all(np.isfinite(pos)):
            raise ValueError("sensor positions must be finite")
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError("wavelength must be positive")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def n_sensors(self) -> int:
        return self.positions.shape[0]

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @classmethod
    def ula(cls, n_sensors: int, spacing: float | None = None, wavelength: float = 1.0):
        """Uniform linear array along the x axis, first sensor at the origin.

        ``spacing`` defaults to half a wavelength.
        """
        if spacing is None:
            spacing = 0.5 * wavelength
        pos = np.zeros((n_sensors, 3))
        pos[:, 0] = spacing * np.arange(n_sensors)
        return cls(pos, wavelength)

    def to_dict(self) -> dict:
        return {"wavelength": self.wavelength, "positions": self.positions.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ArrayGeometry":
        try:
            return cls(np.asarray(doc["positions"], dtype=float), float(doc["wavelength"]))
        except KeyError as exc:
            raise ValueError(f"geometry document is missing {exc}") from None


def load_geometry(path: str | Path) -> ArrayGeometry:
    """Read ``{"wavelength": ..., "positions": [[x, y, z], ...]}`` from JSON."""
    with open(path) as fh:
        return ArrayGeometry.from_dict(json.load(fh))


def save_geometry(geom: ArrayGeometry, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(geom.to_dict(), fh, indent=2)


class Direction(NamedTuple):
    """Elevation in [0, pi] and azimuth in [0, 2 pi), radians."""

    elevation: float
    azimuth: float

    def canonical(self) -> "Direction":
        """Fold arbitrary angles back into the stated ranges.

        Elevations past a pole are reflected, which rotates the azimuth by pi.
        """
        elev = float(np.mod(self.elevation, 2.0 * np.pi))
        azim = float(self.azimuth)
        if elev > np.pi:
            elev = 2.0 * np.pi - elev
            azim += np.pi
        azim = float(np.mod(azim, 2.0 * np.pi))
        # mod can round up to exactly 2 pi for tiny negative inputs
        if azim >= 2.0 * np.pi:
            azim = 0.0
        return Direction(elev, azim)

    @classmethod
    def from_degrees(cls, elevation: float, azimuth: float) -> "Direction":
        return cls(np.deg2rad(elevation), np.deg2rad(azimuth)).canonical()


def unit_direction(direction: Direction) -> np.ndarray:
    elev, azim = direction
    return np.array([np.sin(elev) * np.cos(azim),
                     np.sin(elev) * np.sin(azim),
                     np.cos(elev)])


def steering_vector(geom: ArrayGeometry, direction: Direction) -> np.ndarray:
    """a(theta) with entries exp(j psi_n), psi_n = -(2 pi / lambda) p_n . q."""
    psi = -geom.wavenumber * (geom.positions @ unit_direction(direction))
    return np.exp(1j * psi)


def steering_matrix(geom: ArrayGeometry, azimuths, elevation=HALF_PI) -> np.ndarray:
    """Stack steering vectors for several azimuths as columns (N x K).

    ``elevation`` may be a scalar shared by all columns or one value per
    azimuth.
    """
    azim = np.atleast_1d(np.asarray(azimuths, dtype=float))
    elev = np.broadcast_to(np.asarray(elevation, dtype=float), azim.shape)
    sin_el = np.sin(elev)
    q = np.stack([sin_el * np.cos(azim), sin_el * np.sin(azim), np.cos(elev)])
    return np.exp(-1j * geom.wavenumber * (geom.positions @ q))


def steering_derivative(geom: ArrayGeometry, azimuths, elevation=HALF_PI):
    """Steering matrix and its derivative with respect to azimuth."""
    azim = np.atleast_1d(np.asarray(azimuths, dtype=float))
    elev = np.broadcast_to(np.asarray(elevation, dtype=float), azim.shape)
    sin_el = np.sin(elev)
    q = np.stack([sin_el * np.cos(azim), sin_el * np.sin(azim), np.cos(elev)])
    dq = np.stack([-sin_el * np.sin(azim), sin_el * np.cos(azim), np.zeros_like(azim)])
    k = geom.wavenumber
    A = np.exp(-1j * k * (geom.positions @ q))
    dA = (-1j * k * (geom.positions @ dq)) * A
    return A, dA


class ProjectionStats(NamedTuple):
    """Energy ``e`` of R along a steering direction and the residual trace ``d``."""

    e: float
    d: float


def check_hermitian(R: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    scale = max(abs(np.trace(R)), np.abs(R).max(initial=0.0), np.finfo(float).tiny)
    asym = np.abs(R - R.conj().T).max(initial=0.0)
    if asym > rtol * scale:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3g})")
    return R


def _stats(a: np.ndarray, R: np.ndarray) -> tuple[float, float, float]:
    # returns (e, d, trace); a is a steering vector, R Hermitian
    n = a.shape[0]
    tr = float(np.trace(R).real)
    e = float((a.conj() @ R @ a).real) / n
    d = tr - e
    if d < 0.0 and d > -1e-10 * max(abs(tr), 1e-300):
        d = 0.0
    return e, d, tr


def projection_stats(geom: ArrayGeometry, direction: Direction, R: np.ndarray) -> ProjectionStats:
    """e = (1/N) a^H R a and d = Tr{R} - e for a Hermitian PSD matrix R."""
    R = check_hermitian(R)
    if R.shape[0] != geom.n_sensors:
        raise ValueError("R does not match the number of sensors")
    e, d, _ = _stats(steering_vector(geom, direction), R)
    return ProjectionStats(e, d)
