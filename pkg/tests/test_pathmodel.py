import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evoplanner.exceptions import InvalidSpecError
from evoplanner.pathmodel import (
    ControlPath,
    RotatedFrame,
    Waypoints,
    compute_bounds,
    control_points_in_range,
    endpoints_rotated,
    initialize_path,
    initialize_population,
    sample_control_x,
)

coords = arrays(np.float64, (7, 3), elements=st.floats(-1e3, 1e3))


@given(st.floats(-math.pi, math.pi), st.floats(-100, 100), st.floats(-100, 100), coords)
def test_frame_roundtrip(theta, ox, oy, pts):
    frame = RotatedFrame(theta, (ox, oy))
    back = frame.to_world(frame.to_rotated(pts))
    assert np.allclose(back, pts, atol=1e-9)


def test_frame_puts_target_on_axis(ref_scenario):
    sc = ref_scenario
    frame = RotatedFrame.from_scenario(sc)
    t = frame.to_rotated(np.array(sc.target))
    assert t[1] == pytest.approx(0.0, abs=1e-12)
    assert t[0] == pytest.approx(math.hypot(100, 70))
    s, e = endpoints_rotated(sc, frame)
    assert s[:2] == (0.0, 0.0) and e[1] == 0.0


def test_bounds_windows(ref_scenario):
    frame = RotatedFrame.from_scenario(ref_scenario)
    b = compute_bounds(ref_scenario, frame, 6)
    dl = math.hypot(100, 70) / 7
    assert b.delta_l == pytest.approx(dl)
    assert np.allclose(b.x_windows[:, 0], np.arange(6) * dl)
    assert np.allclose(b.x_windows[:, 1], np.arange(2, 8) * dl)
    assert b.y_min < 0 < b.y_max
    with pytest.raises(InvalidSpecError):
        compute_bounds(ref_scenario, frame, 1)


def test_initialization_respects_bounds(ref_scenario, rng):
    frame = RotatedFrame.from_scenario(ref_scenario)
    b = compute_bounds(ref_scenario, frame, 8)
    X = initialize_population(ref_scenario, frame, b, 200, rng)
    assert X.shape == (200, 8, 3)
    assert not b.out_of_range(X).any()
    assert np.all(np.diff(X[..., 0], axis=-1) >= 0)
    assert np.all(X[..., 2] >= b.z_min) and np.all(X[..., 2] <= b.z_max)


def test_initialize_path(ref_scenario, rng):
    frame = RotatedFrame.from_scenario(ref_scenario)
    b = compute_bounds(ref_scenario, frame, 5)
    p = initialize_path(ref_scenario, frame, b, 5, rng)
    assert p.n == 5 and control_points_in_range(p, b) == 0
    assert p.full().shape == (7, 3)
    with pytest.raises(InvalidSpecError):
        initialize_path(ref_scenario, frame, b, 6, rng)


def test_sample_control_x_stats():
    x = sample_control_x(np.random.default_rng(0), 4, 10.0, size=20000, clamp=False)
    assert np.allclose(x.mean(axis=0), [10, 20, 30, 40], atol=0.1)
    assert np.allclose(x.std(axis=0), 10 / 3, atol=0.05)


def test_clamp_restores_box_and_order(ref_scenario, rng):
    frame = RotatedFrame.from_scenario(ref_scenario)
    b = compute_bounds(ref_scenario, frame, 6)
    X = rng.uniform(-500, 500, size=(50, 6, 3))
    Y = b.clamp(X)
    assert not b.out_of_range(Y).any()
    assert np.all(np.diff(Y[..., 0], axis=-1) >= 0)


def test_path_validation():
    with pytest.raises(InvalidSpecError):
        ControlPath(np.zeros((1, 3)), (0, 0, 0), (1, 0, 0))
    with pytest.raises(InvalidSpecError):
        ControlPath(np.full((3, 3), np.inf), (0, 0, 0), (1, 0, 0))
    with pytest.raises(InvalidSpecError):
        Waypoints(np.zeros((3, 2)))
