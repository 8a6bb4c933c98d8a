import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdoa.geometry import (ArrayGeometry, Direction, load_geometry, projection_stats,
                            steering_derivative, steering_matrix, steering_vector,
                            unit_direction)
from conftest import random_geometry, random_psd

angles = st.floats(0.0, np.pi, allow_nan=False)
azimuths = st.floats(0.0, 2 * np.pi, exclude_max=True, allow_nan=False)


@pytest.mark.parametrize("elev, azim, expected", [
    (0.0, 1.234, [0, 0, 1]),
    (np.pi / 2, 0.0, [1, 0, 0]),
    (np.pi / 2, np.pi / 2, [0, 1, 0]),
])
def test_unit_direction_axes(elev, azim, expected):
    np.testing.assert_allclose(unit_direction(Direction(elev, azim)), expected, atol=1e-15)


@given(angles, azimuths)
def test_unit_direction_has_unit_norm(elev, azim):
    assert np.linalg.norm(unit_direction(Direction(elev, azim))) == pytest.approx(1.0, abs=1e-14)


def test_broadside_steering_is_all_ones():
    geom = ArrayGeometry.ula(4)
    np.testing.assert_allclose(steering_vector(geom, Direction(np.pi / 2, np.pi / 2)),
                               np.ones(4), atol=1e-15)


def test_steering_at_60_degrees_quarter_wave_steps():
    # psi_n = -pi (n - 1) cos(pi/3) = -pi (n - 1) / 2
    geom = ArrayGeometry.ula(4)
    a = steering_vector(geom, Direction(np.pi / 2, np.pi / 3))
    np.testing.assert_allclose(a, [1, -1j, -1, 1j], atol=1e-15)


def test_steering_matches_per_sensor_phase(rng):
    for _ in range(50):
        geom = random_geometry(rng)
        d = Direction(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        a = steering_vector(geom, d)
        q = [np.sin(d[0]) * np.cos(d[1]), np.sin(d[0]) * np.sin(d[1]), np.cos(d[0])]
        for n, p in enumerate(geom.positions):
            psi = -2 * np.pi / geom.wavelength * sum(pi * qi for pi, qi in zip(p, q))
            assert a[n] == pytest.approx(complex(np.cos(psi), np.sin(psi)), abs=1e-12)


@settings(max_examples=200)
@given(angles, azimuths)
def test_steering_entries_unit_modulus_and_azimuth_periodic(elev, azim):
    geom = ArrayGeometry.ula(7, spacing=0.37)
    a = steering_vector(geom, Direction(elev, azim))
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
    assert np.vdot(a, a).real == pytest.approx(7, abs=1e-12)
    b = steering_vector(geom, Direction(elev, azim + 2 * np.pi).canonical())
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_canonical_direction_ranges():
    d = Direction(-0.3, -0.1).canonical()
    assert 0 <= d.elevation <= np.pi and 0 <= d.azimuth < 2 * np.pi
    np.testing.assert_allclose(unit_direction(d), unit_direction(Direction(-0.3, -0.1)), atol=1e-14)
    assert Direction(1.0, -1e-18).canonical().azimuth < 2 * np.pi


def test_steering_matrix_columns_match_vectors(rng):
    geom = random_geometry(rng)
    az = rng.uniform(0, np.pi, 5)
    A = steering_matrix(geom, az, 1.1)
    for k, phi in enumerate(az):
        np.testing.assert_allclose(A[:, k], steering_vector(geom, Direction(1.1, phi)), atol=1e-14)


def test_steering_derivative_finite_difference(rng):
    geom = random_geometry(rng)
    az, h = rng.uniform(0.2, 3.0, 4), 1e-6
    _, dA = steering_derivative(geom, az, 0.9)
    fd = (steering_matrix(geom, az + h, 0.9) - steering_matrix(geom, az - h, 0.9)) / (2 * h)
    np.testing.assert_allclose(dA, fd, atol=1e-7)


def test_projection_stats_identity(ula10):
    e, d = projection_stats(ula10, Direction(np.pi / 2, 0.7), np.eye(10))
    assert e == pytest.approx(1.0) and d == pytest.approx(9.0)


def test_projection_stats_aligned_rank_one(ula10):
    dirn = Direction(np.pi / 2, 1.1)
    a = steering_vector(ula10, dirn)
    e, d = projection_stats(ula10, dirn, np.outer(a, a.conj()))
    assert e == pytest.approx(10.0, rel=1e-12)
    assert d == 0.0 or abs(d) < 1e-12


def test_projection_stats_dense_trace_oracle(rng, ula10):
    for _ in range(1000):
        R = random_psd(rng, 10, rank=rng.integers(1, 11))
        dirn = Direction(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        a = steering_vector(ula10, dirn)
        Pi = np.outer(a, a.conj()) / 10
        e, d = projection_stats(ula10, dirn, R)
        tr = np.trace(R).real
        assert e == pytest.approx(np.trace(Pi @ R).real, rel=1e-10)
        assert 0 <= e <= tr * (1 + 1e-12) and d >= 0
        assert e + d == pytest.approx(tr, rel=1e-10)


def test_projection_stats_rejects_non_hermitian(ula10, rng):
    R = rng.standard_normal((10, 10))
    with pytest.raises(ValueError, match="Hermitian"):
        projection_stats(ula10, Direction(np.pi / 2, 1.0), R)


@pytest.mark.parametrize("positions, wavelength", [
    ([[0, 0, 0]], 1.0),
    ([[0, 0, 0], [1, 0, 0]], 0.0),
    ([[0, 0, 0], [np.nan, 0, 0]], 1.0),
    ([[0, 0], [1, 0]], 1.0),
])
def test_geometry_validation(positions, wavelength):
    with pytest.raises(ValueError):
        ArrayGeometry(positions, wavelength)


def test_geometry_json_roundtrip(tmp_path):
    path = tmp_path / "geom.json"
    path.write_text(json.dumps({"wavelength": 2.0, "positions": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]}))
    geom = load_geometry(path)
    assert geom.n_sensors == 3 and geom.wavelength == 2.0
    again = ArrayGeometry.from_dict(geom.to_dict())
    np.testing.assert_array_equal(again.positions, geom.positions)
    with pytest.raises(ValueError, match="missing"):
        ArrayGeometry.from_dict({"positions": [[0, 0, 0], [1, 0, 0]]})
