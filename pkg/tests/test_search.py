import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdoa.geometry import ArrayGeometry, steering_matrix
from emdoa.search import (AzimuthObjective, LineSearchParams, ascend, grid_init,
                          objective_and_gradient)
from conftest import random_psd


def rank_one(geom, phi):
    a = steering_matrix(geom, phi)[:, 0]
    return np.outer(a, a.conj())


def sequential_ascend(geom, R, phi, p):
    # one trial at a time; shares the objective so only the blocking differs
    obj = AzimuthObjective(geom, R)
    g = lambda x: obj.value(np.array([x]))[0]
    val, gp = obj.value_and_grad(phi)
    for _ in range(p.max_gradient_steps):
        if abs(gp) <= p.tol:
            break
        t0 = p.rho * ((np.pi - phi) if gp > 0 else -phi) / gp
        for j in range(p.max_halvings + 1):
            t = t0 * p.gamma ** j
            if g(phi + t * gp) >= val + p.eta * t * gp * gp:
                break
        else:
            break
        phi = phi + t * gp
        val, gp = obj.value_and_grad(phi)
    return phi


@pytest.mark.parametrize("phi", [0.1, 1.0, 2.5, 3.1])
def test_identity_objective_is_flat(ula10, phi):
    g, gp = objective_and_gradient(ula10, np.eye(10), phi)
    assert g == pytest.approx(10.0, rel=1e-13)
    assert abs(gp) < 1e-12


def test_rank_one_peak(ula10):
    phi0 = 1.2
    g, gp = objective_and_gradient(ula10, rank_one(ula10, phi0), phi0)
    assert g == pytest.approx(100.0, rel=1e-12)
    assert abs(gp) < 1e-9


def test_gradient_finite_difference(ula10, rng):
    h = 1e-6
    worst = 0.0
    for _ in range(1000):
        R = random_psd(rng, 10, rank=rng.integers(1, 4))
        phi = rng.uniform(0.05, np.pi - 0.05)
        obj = AzimuthObjective(ula10, R)
        _, gp = obj.value_and_grad(phi)
        fd = (obj.value(phi + h) - obj.value(phi - h)) / (2 * h)
        scale = max(abs(fd), 1e-3 * obj.value(phi))
        worst = max(worst, abs(gp - fd) / scale)
    assert worst < 1e-5


def test_vectorized_value_matches_scalar(ula10, rng):
    R = random_psd(rng, 10)
    obj = AzimuthObjective(ula10, R)
    phis = rng.uniform(0, np.pi, 17)
    np.testing.assert_allclose(obj.value(phis), [obj.value(p) for p in phis], rtol=1e-13)


def test_ascend_stationary_start_is_unchanged(ula10):
    res = ascend(ula10, np.eye(10), 0.8)
    assert res.azimuth == 0.8 and res.steps == 0 and not res.capped


def test_ascend_finds_rank_one_peak(ula10, rng):
    fine = np.deg2rad(np.arange(0.001, 180.0, 0.001))
    for _ in range(10):
        star = rng.uniform(0.3, np.pi - 0.3)
        R = rank_one(ula10, star)
        best = fine[np.argmax(AzimuthObjective(ula10, R).value(fine))]
        start = star + np.deg2rad(rng.uniform(-2, 2))
        res = ascend(ula10, R, start)
        assert abs(np.rad2deg(res.azimuth - best)) < 0.01
        assert abs(np.rad2deg(res.azimuth - star)) < 0.01


def test_ascend_never_decreases(ula10, rng):
    for _ in range(1000):
        R = random_psd(rng, 10, rank=rng.integers(1, 11))
        phi = rng.uniform(1e-3, np.pi - 1e-3)
        obj = AzimuthObjective(ula10, R)
        res = ascend(ula10, R, phi, objective=obj)
        assert 0 < res.azimuth < np.pi
        assert res.value >= obj.value(phi) - 1e-12 * obj.value(phi)


class Recorder(AzimuthObjective):
    def __init__(self, *args):
        super().__init__(*args)
        self.points = []

    def value_and_grad(self, phi):
        out = super().value_and_grad(phi)
        self.points.append((phi, *out))
        return out


def test_every_accepted_step_is_armijo(ula10, rng):
    p = LineSearchParams()
    for _ in range(200):
        R = random_psd(rng, 10, rank=2)
        rec = Recorder(ula10, R)
        ascend(ula10, R, rng.uniform(0.1, 3.0), p, objective=rec)
        for (x0, g0, d0), (x1, g1, _) in zip(rec.points, rec.points[1:]):
            t = (x1 - x0) / d0
            assert t > 0
            assert g1 >= g0 + p.eta * t * d0 * d0


def test_blocked_backtracking_equals_sequential(ula10, rng):
    # gamma near 1 forces many shrinks, so accepted trials span several blocks
    for p in (LineSearchParams(), LineSearchParams(rho=0.9, gamma=0.95, tol=1e-6)):
        for _ in range(30):
            R = random_psd(rng, 10, rank=rng.integers(1, 4))
            phi = rng.uniform(0.1, 3.0)
            assert ascend(ula10, R, phi, p).azimuth == pytest.approx(
                sequential_ascend(ula10, R, phi, p), abs=1e-12)


def test_cap_is_flagged(ula10):
    R = rank_one(ula10, 2.0)
    res = ascend(ula10, R, 1.9, LineSearchParams(tol=1e-12, max_gradient_steps=1))
    assert res.capped and res.steps == 1


@pytest.mark.parametrize("bad", [0.0, np.pi, -0.2, 4.0])
def test_ascend_rejects_boundary_start(ula10, bad):
    with pytest.raises(ValueError):
        ascend(ula10, np.eye(10), bad)


@pytest.mark.parametrize("kwargs", [dict(rho=0), dict(rho=1), dict(eta=0.5), dict(gamma=1.0),
                                    dict(tol=0), dict(max_gradient_steps=0)])
def test_line_search_param_ranges(kwargs):
    with pytest.raises(ValueError):
        LineSearchParams(**kwargs)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, np.pi - 0.05), st.floats(-0.03, 0.03))
def test_ascend_hits_peak_from_nearby(star, offset):
    geom = ArrayGeometry.ula(10)
    res = ascend(geom, rank_one(geom, star), star + offset)
    assert abs(res.azimuth - star) < np.deg2rad(0.01)


def test_grid_init_rank_one(ula10):
    phi0 = np.deg2rad(71.234)
    out = grid_init(ula10, rank_one(ula10, phi0), np.deg2rad(0.1))
    assert abs(np.rad2deg(out - phi0)) <= 0.1


def test_grid_init_flat_takes_smallest(ula10):
    res = np.deg2rad(1.0)
    assert grid_init(ula10, np.eye(10), res) == pytest.approx(res)


def test_grid_init_two_peaks(ula10):
    p1, p2 = np.deg2rad(40.0), np.deg2rad(120.0)
    R = rank_one(ula10, p1) + 2 * rank_one(ula10, p2)
    fine = np.deg2rad(np.arange(0.001, 180.0, 0.001))
    best = fine[np.argmax(AzimuthObjective(ula10, R).value(fine))]
    out = grid_init(ula10, R, np.deg2rad(0.5))
    assert abs(np.rad2deg(out - best)) <= 0.5
    assert abs(np.rad2deg(out - p2)) < 1.0


def test_grid_init_bad_resolution(ula10):
    with pytest.raises(ValueError):
        grid_init(ula10, np.eye(10), 4.0)
