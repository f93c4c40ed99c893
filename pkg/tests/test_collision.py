import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from cease.belief import Sce, SceCovariance, SceState
from cease.collision import (CpeReport, RobotConfig, RobotTrajectory, collides, cpe_aggregate, cpe_formula, cpe_single,
                             inflate_velocity, segment_segment_distance, segments_distance_matrix, sight_blocked)

from oracles import min_pairwise, point_segment_dist, sample_capsule_surface, sample_sphere_surface

ARM = RobotConfig.from_links([((0, 0, 0), (0, 0, 0.4), 0.06), ((0, 0, 0.4), (0.35, 0, 0.5), 0.05),
                              ((0.35, 0, 0.5), (0.6, 0.1, 0.35), 0.04)])
HUMANOID = ((((0, 0, 0), 0.22), ((0, -0.22, 0.05), 0.07), ((0, -0.22, -0.2), 0.06), ((0, 0.22, 0.05), 0.07),
             ((0, 0.22, -0.2), 0.06)))


def sce_at(x, v=(0, 0, 0), u=0.5, spheres=(((0, 0, 0), 0.1),), o=(0, 0, 0)):
    return Sce("s", SceState(x, o, v, (0, 0, 0), u), SceCovariance.zeros(), spheres=spheres)


def test_sphere_on_axis_collides():
    assert collides(SceState((0, 0, 0.2), (0, 0, 0), (0, 0, 0), (0, 0, 0)), (((0, 0, 0), 0.05),), ARM)


def test_separated_sphere_misses():
    # nearest capsule is the base link (r 0.06) along z; sphere radius 0.1
    x = (0.06 + 0.1 + 0.01, 0.0, -0.0)
    bar = RobotConfig.from_links([((0, 0, -1), (0, 0, 0.2), 0.06)])
    assert not collides(SceState(x, (0, 0, 0), (0, 0, 0), (0, 0, 0)), (((0, 0, 0), 0.1),), bar)


def test_near_miss_humanoid_against_sampling_oracle():
    rng = np.random.default_rng(7)
    rotvec = np.array([0.0, 0.0, 0.4])
    pos = np.array([0.90, 0.12, 0.45])
    st_ = SceState(pos, rotvec, (0, 0, 0), (0, 0, 0))
    rot = Rotation.from_rotvec(rotvec)
    hull_h = np.concatenate([sample_sphere_surface(pos + rot.apply(off), r, 20_000, rng) for off, r in HUMANOID])
    hull_a = np.concatenate([sample_capsule_surface(ARM.a[i], ARM.b[i], ARM.r[i], 33_334, rng) for i in range(3)])
    gap = min_pairwise(hull_h, hull_a)
    # the pose was chosen as a near miss: positive gap of a few centimetres
    assert 0.005 < gap < 0.1
    assert not collides(st_, HUMANOID, ARM)
    # pushing the humanoid in by the measured gap (plus slack) makes it collide
    direction = np.array([-1.0, 0.0, 0.0])
    moved = SceState(pos + direction * (gap + 0.02), rotvec, (0, 0, 0), (0, 0, 0))
    assert collides(moved, HUMANOID, ARM)


def _axis_gap(center, r_s, robot, n=2000):
    """Sampling oracle: sphere-to-capsule gap from dense points on each capsule axis."""
    t = np.linspace(0.0, 1.0, n)[:, None]
    best = math.inf
    for a, b, r in zip(robot.a, robot.b, robot.r):
        pts = a + t * (b - a)
        best = min(best, float(np.min(np.linalg.norm(pts - center, axis=1))) - r_s - r)
    return best


def test_collides_agrees_with_oracle_random_scenes():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(1000):
        links = [(rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 3), rng.uniform(0.02, 0.1)) for _ in range(3)]
        robot = RobotConfig.from_links(links)
        c = rng.uniform(-0.7, 0.7, 3)
        r = rng.uniform(0.02, 0.2)
        gap = _axis_gap(c, r, robot)
        if abs(gap) <= 0.002:
            continue
        checked += 1
        assert collides(SceState(c, (0, 0, 0), (0, 0, 0), (0, 0, 0)), (((0, 0, 0), r),), robot) == (gap < 0)
    assert checked > 950


@pytest.mark.parametrize("v, a, t, expected", [
    ([1, 0, 0], 2.0, 1.0, [2, 0, 0]),
    ([1, 0, 0], 2.0, 0.0, [1, 0, 0]),
    ([0, 3, 4], 1.0, 2.0, [0, 4.2, 5.6]),  # factor 1 + 1 * 2**2 / (2 * 5)
    ([0, 0, 0], 5.0, 3.0, [0, 0, 0]),
])
def test_inflate_velocity(v, a, t, expected):
    np.testing.assert_allclose(inflate_velocity(v, a, t), expected, atol=1e-12)


def test_inflate_velocity_stacked():
    out = inflate_velocity(np.array([[1.0, 0, 0], [0, 3, 4]]), 1.0, 2.0)
    np.testing.assert_allclose(out, [[3, 0, 0], [0, 4.2, 5.6]])


# Scenes realizing each (l, l') pair against a wall capsule at x = 1.
WALL = RobotConfig.from_links([((1, -1, 0), (1, 1, 0), 0.05)])
SCENES = {
    (1, 1): dict(x=(1, 0, 0)),                  # resting on the wall: both flags set
    (1, 0): dict(x=(0.5, 0, 0), v=(1, 0, 0)),   # nominal hits, accelerated overshoots
    (0, 1): dict(x=(0, 0, 0), v=(1, 0, 0)),     # nominal short, accelerated reaches
    (0, 0): dict(x=(-2, 0, 0), v=(0, 0, 0)),    # nowhere near
}
DT, A_MAX = 0.5, 8.0  # inflation factor 1 + 8 * 0.25 / 2 = 2


def closed_form(l, l_acc, observed, u):
    if l:
        return 1.0 - u if observed else 1.0
    if l_acc and not observed:
        return 1.0 - u
    return 0.0


def test_cpe_examples():
    hit, near = SCENES[(1, 1)], SCENES[(0, 1)]
    assert cpe_single(sce_at(u=0.9, **hit), True, WALL, DT, A_MAX) == pytest.approx(0.1, abs=1e-15)
    for u in (0.0, 0.3, 1.0):
        assert cpe_single(sce_at(u=u, **hit), False, WALL, DT, A_MAX) == 1.0
    assert cpe_single(sce_at(u=0.4, **SCENES[(0, 0)]), False, WALL, DT, A_MAX) == 0.0
    assert cpe_single(sce_at(u=0.7, **near), False, WALL, DT, A_MAX) == pytest.approx(0.3, abs=1e-15)
    # strict formula: the accelerated-only branch vanishes once observed
    assert cpe_single(sce_at(u=0.7, **near), True, WALL, DT, A_MAX) == 0.0


def test_cpe_truth_table_exact():
    rng = np.random.default_rng(0)
    us = rng.random(100)
    for (l, l_acc), scene in SCENES.items():
        for observed in (0, 1):
            for u in us:
                got = cpe_single(sce_at(u=float(u), **scene), bool(observed), WALL, DT, A_MAX)
                assert got == closed_form(l, l_acc, observed, float(u))


def test_t_accel_extends_inflation():
    s = sce_at(x=(0, 0, 0), v=(1, 0, 0), u=0.5)
    # default t_accel = dt: factor 1.25, the sphere ends at 0.625 and misses the wall at 1 +/- 0.15
    assert cpe_single(s, False, WALL, DT, 2.0) == 0.0
    # accelerating for 1 s: factor 2, the sphere ends on the wall
    assert cpe_single(s, False, WALL, DT, 2.0, t_accel=1.0) == 0.5


def test_aggregate_examples():
    assert cpe_aggregate([]) == 0.0
    assert cpe_aggregate([1.0, 0.2]) == 1.0
    assert cpe_aggregate([0.5, 0.5]) == 0.75
    with pytest.raises(ValueError):
        cpe_aggregate([1.2])


def test_report():
    r = CpeReport.from_values({"a": 0.2, "b": 0.5})
    assert r.aggregate >= max(r.per_sce.values())


def test_robot_types_validate():
    with pytest.raises(ValueError):
        RobotConfig.from_links([((0, 0, 0), (1, 0, 0), 0.0)])
    with pytest.raises(ValueError):
        RobotTrajectory((), 0.1)
    traj = RobotTrajectory((ARM, RobotConfig(ARM.a + 1.0, ARM.b + 1.0, ARM.r)), 1.0)
    np.testing.assert_allclose(traj.config_at(0.5).a, ARM.a + 0.5)
    np.testing.assert_allclose(traj.config_at(7.0).a, ARM.a + 1.0)
    loop = RobotTrajectory(traj.samples, 1.0, loop=True)
    np.testing.assert_allclose(loop.config_at(1.25).a, ARM.a + 0.25)


# properties -------------------------------------------------------------------

u_st = st.floats(0.0, 1.0)
flag = st.integers(0, 1)


@given(flag, flag, flag, u_st)
def test_formula_values(l, l_acc, o, u):
    assert cpe_formula(l, l_acc, o, u) in (0.0, 1.0 - u, 1.0)


@given(flag, flag, flag, u_st, u_st)
def test_formula_nonincreasing_in_u(l, l_acc, o, u1, u2):
    lo, hi = sorted((u1, u2))
    assert cpe_formula(l, l_acc, o, hi) <= cpe_formula(l, l_acc, o, lo)


@given(flag, flag, u_st)
def test_observation_helps(l, l_acc, u):
    assert cpe_formula(l, l_acc, 1, u) <= cpe_formula(l, l_acc, 0, u)


@given(st.lists(u_st, max_size=8), st.randoms())
def test_aggregate_bounds(ps, rnd):
    agg = cpe_aggregate(ps)
    if ps:
        assert max(ps) - 1e-12 <= agg <= min(1.0, sum(ps)) + 1e-12
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    assert cpe_aggregate(shuffled) == pytest.approx(agg, abs=1e-12)


seg_st = st.lists(st.floats(-2, 2), min_size=3, max_size=3)


@given(seg_st, seg_st, seg_st, seg_st)
def test_segment_distance_vectorized_matches_scalar(p0, p1, q0, q1):
    d = segments_distance_matrix(np.array([p0]), np.array([p1]), np.array([q0]), np.array([q1]))[0, 0]
    assert d == pytest.approx(segment_segment_distance(p0, p1, q0, q1), abs=1e-7)
    # never below the true distance by more than rounding; sampled oracle gives an upper bound
    t = np.linspace(0, 1, 201)[:, None]
    ps = np.array(p0) + t * (np.array(p1) - np.array(p0))
    qs = np.array(q0) + t * (np.array(q1) - np.array(q0))
    assert d <= min_pairwise(ps, qs) + 1e-9


def test_sight_blocked():
    bar = RobotConfig.from_links([((1, -1, 0), (1, 1, 0), 0.05)])
    pts = np.array([[2.0, 0, 0], [2.0, 0, 0.5], [0.5, 0, 0]])
    assert list(sight_blocked(np.zeros(3), pts, bar)) == [True, False, False]
    assert point_segment_dist([1, 0, 0.05], [1, -1, 0], [1, 1, 0]) == pytest.approx(0.05)
