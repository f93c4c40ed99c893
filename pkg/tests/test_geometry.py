import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cease.geometry import (CameraModel, SphericalGrid, VisionState, angular_distance, direction_to_vision_state,
                            in_fov, in_fov_many, rodrigues_rotate, step_toward, wrap_angle)

az_st = st.floats(-math.pi, math.pi - 1e-9)
el_st = st.floats(-math.pi / 2, math.pi / 2)
vs_st = st.builds(VisionState, az_st, el_st)
vec_st = st.lists(st.floats(-10, 10), min_size=3, max_size=3).map(np.array)
unit_st = vec_st.filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


def test_identity_distance():
    assert angular_distance(VisionState(0, 0), VisionState(0, 0)) == 0.0


def test_orthogonal_distance():
    assert angular_distance(VisionState(0, 0), VisionState(math.pi / 2, 0)) == pytest.approx(math.pi / 2, abs=1e-12)


def test_distance_matches_dot_product():
    a, b = VisionState(0.3, 0.4), VisionState(-0.2, 0.1)
    u = np.array([math.cos(0.4) * math.cos(0.3), math.cos(0.4) * math.sin(0.3), math.sin(0.4)])
    v = np.array([math.cos(0.1) * math.cos(-0.2), math.cos(0.1) * math.sin(-0.2), math.sin(0.1)])
    assert angular_distance(a, b) == pytest.approx(math.acos(u @ v), abs=1e-12)


def test_azimuth_wraps():
    assert VisionState(math.pi, 0).azimuth == pytest.approx(-math.pi)
    assert VisionState(3 * math.pi / 2, 0).azimuth == pytest.approx(-math.pi / 2)
    assert wrap_angle(math.pi) == -math.pi
    with pytest.raises(ValueError):
        VisionState(0.0, 2.0)


@pytest.mark.parametrize("o, axis, theta, expected", [
    ([1, 0, 0], [0, 0, 1], math.pi / 2, [0, 1, 0]),
    ([0, 0, 2], [0, 0, 1], 1.3, [0, 0, 2]),
    ([1, 1, 0], [1, 0, 0], math.pi, [1, -1, 0]),
])
def test_rodrigues_examples(o, axis, theta, expected):
    np.testing.assert_allclose(rodrigues_rotate(o, axis, theta), expected, atol=1e-12)


def test_rodrigues_rejects_non_unit_axis():
    with pytest.raises(ValueError):
        rodrigues_rotate([1, 0, 0], [0, 0, 2], 0.1)


@pytest.mark.parametrize("point, origin, az, el", [
    ([1, 0, 0], [0, 0, 0], 0.0, 0.0),
    ([0, 0, 1], [0, 0, 0], 0.0, math.pi / 2),
    ([0, 2, 0], [0, 1, 0], math.pi / 2, 0.0),
])
def test_direction_examples(point, origin, az, el):
    s = direction_to_vision_state(point, origin)
    assert s.azimuth == pytest.approx(az, abs=1e-12)
    assert s.elevation == pytest.approx(el, abs=1e-12)


def test_direction_undefined_at_origin():
    with pytest.raises(ValueError):
        direction_to_vision_state([1, 1, 1], [1, 1, 1])


def test_in_fov_examples():
    cam = CameraModel(origin=(0.1, -0.2, 0.3), fov_half_angle=math.radians(36), d_max=3.0)
    axis = VisionState(0.4, -0.2)
    u = axis.unit()
    o = np.array(cam.origin)
    assert in_fov(cam, axis, o + u * 1.5)
    assert not in_fov(cam, axis, o + u * 3.03)
    # tilt the direction off the axis by half-angle + 0.01 about a perpendicular axis
    perp = np.cross(u, [0, 0, 1])
    perp /= np.linalg.norm(perp)
    off = rodrigues_rotate(u, perp, cam.fov_half_angle + 0.01)
    assert not in_fov(cam, axis, o + off * 1.0)
    inside = rodrigues_rotate(u, perp, cam.fov_half_angle - 0.01)
    assert in_fov(cam, axis, o + inside * 1.0)


def test_camera_model_invariants():
    with pytest.raises(ValueError):
        CameraModel(fov_half_angle=math.pi / 2)
    with pytest.raises(ValueError):
        CameraModel(d_max=0.0)
    cam = CameraModel(el_min=-0.5, el_max=0.2)
    assert cam.clamp(VisionState(1.0, 0.9)).elevation == 0.2


@given(vs_st, vs_st)
def test_distance_symmetric_and_bounded(a, b):
    d = angular_distance(a, b)
    assert 0.0 <= d <= math.pi
    assert d == pytest.approx(angular_distance(b, a), abs=1e-12)


@given(vs_st)
def test_distance_identity(a):
    assert angular_distance(a, a) == pytest.approx(0.0, abs=1e-7)


@given(vs_st, vs_st)
def test_distance_zero_only_for_same_direction(a, b):
    if angular_distance(a, b) < 1e-12:
        np.testing.assert_allclose(a.unit(), b.unit(), atol=1e-9)
    else:
        assert np.linalg.norm(a.unit() - b.unit()) > 0


@given(vs_st, vs_st, vs_st)
def test_triangle_inequality(a, b, c):
    assert angular_distance(a, c) <= angular_distance(a, b) + angular_distance(b, c) + 1e-9


@given(vec_st, unit_st, st.floats(-6, 6))
def test_rodrigues_preserves_norm(o, axis, theta):
    r = rodrigues_rotate(o, axis, theta)
    assert np.linalg.norm(r) == pytest.approx(np.linalg.norm(o), abs=1e-9)


@given(vec_st, unit_st, st.floats(-6, 6), st.floats(-6, 6))
def test_rodrigues_composes(o, axis, a, b):
    two = rodrigues_rotate(rodrigues_rotate(o, axis, b), axis, a)
    np.testing.assert_allclose(two, rodrigues_rotate(o, axis, a + b), atol=1e-8)


@given(unit_st, st.sampled_from([(32, 16), (16, 8), (4, 2), (7, 5)]))
def test_grid_lookup_total(u, shape):
    grid = SphericalGrid(*shape)
    k = grid.cell_of(u)
    assert 0 <= k < grid.n_cells
    assert grid.cells_of(u[None, :])[0] == k
    ang = angular_distance(grid.centers[k], VisionState.from_unit(u))
    assert ang <= grid.angular_radius[k] + 1e-9


def test_grid_sizes_and_wrap():
    g = SphericalGrid(32, 16)
    assert g.n_cells == 512 and len(g.centers) == 512
    assert g.index(-1, 3) == g.index(31, 3)
    # azimuth neighbours across the seam touch
    assert g.gaps[g.index(0, 8), g.index(31, 8)] == 0.0
    # all cells of the polar row touch each other
    assert np.all(g.gaps[np.ix_(range(32), range(32))] == 0.0)


@given(vs_st, vs_st, st.floats(0.0, 4.0))
def test_step_toward_bounded(a, b, step):
    s = step_toward(a, b, step)
    assert angular_distance(a, s) <= step + 1e-9
    if angular_distance(a, b) <= step:
        assert s == b
    else:
        # moves along the great circle: remaining distance shrinks by the step
        assert angular_distance(s, b) == pytest.approx(angular_distance(a, b) - step, abs=1e-7)


@given(st.lists(vec_st, min_size=1, max_size=20), vs_st)
def test_in_fov_many_matches_scalar(points, axis):
    cam = CameraModel(origin=(0.0, 0.0, 0.5), d_max=4.0)
    pts = np.array(points)
    many = in_fov_many(cam, axis.unit(), pts)
    assert list(many) == [in_fov(cam, axis, p) for p in pts]
