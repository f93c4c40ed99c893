"""Sphere-vs-capsule collision predicate and per-interval collision probability estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .belief import Sce, SceState, predict_state
from .geometry import rodrigues_rotate


@dataclass(frozen=True, eq=False)
class RobotConfig:
    """Arm pose as a chain of capsules: ``a[i]``-``b[i]`` segment with radius ``r[i]``."""

    a: np.ndarray
    b: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1, 3)
        b = np.array(self.b, dtype=float).reshape(-1, 3)
        r = np.array(self.r, dtype=float).reshape(-1)
        if len(a) < 1 or not (len(a) == len(b) == len(r)):
            raise ValueError("a robot config needs >= 1 link with matching endpoints and radii")
        if np.any(r <= 0):
            raise ValueError("capsule radii must be positive")
        for name, v in (("a", a), ("b", b), ("r", r)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_links(cls, links: Sequence) -> "RobotConfig":
        """Build from ``[(endpoint_a, endpoint_b, radius), ...]``."""
        return cls([l[0] for l in links], [l[1] for l in links], [l[2] for l in links])

    @property
    def end_effector(self) -> np.ndarray:
        return self.b[-1]

    @property
    def n_links(self) -> int:
        return len(self.r)


@dataclass(frozen=True, eq=False)
class RobotTrajectory:
    """Uniformly sampled arm trajectory; sample ``i`` is the pose at ``t0 + i*dt``.

    Between samples poses are linearly interpolated. Outside the sampled span the
    trajectory either holds its end poses or, with ``loop``, repeats.
    """

    samples: tuple
    dt: float
    t0: float = 0.0
    loop: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) < 1:
            raise ValueError("trajectory needs at least one sample")
        if self.dt <= 0:
            raise ValueError("trajectory dt must be positive")
        n = {s.n_links for s in self.samples}
        if len(n) != 1:
            raise ValueError("all samples must have the same number of links")
        A = np.stack([s.a for s in self.samples])
        B = np.stack([s.b for s in self.samples])
        object.__setattr__(self, "_A", A)
        object.__setattr__(self, "_B", B)

    @classmethod
    def static(cls, config: RobotConfig) -> "RobotTrajectory":
        return cls((config,), 1.0)

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) * self.dt

    def _locate(self, t: float) -> tuple[int, float]:
        n = len(self.samples)
        if n == 1:
            return 0, 0.0
        s = (t - self.t0) / self.dt
        if self.loop:
            s = s % (n - 1)
        s = min(max(s, 0.0), n - 1.0)
        i = min(int(math.floor(s)), n - 2)
        return i, s - i

    def config_at(self, t: float) -> RobotConfig:
        i, f = self._locate(t)
        if f == 0.0:
            return self.samples[i]
        a = (1 - f) * self._A[i] + f * self._A[i + 1]
        b = (1 - f) * self._B[i] + f * self._B[i + 1]
        return RobotConfig(a, b, self.samples[0].r)

    def end_effector_at(self, t: float) -> np.ndarray:
        i, f = self._locate(t)
        if f == 0.0:
            return self._B[i, -1]
        return (1 - f) * self._B[i, -1] + f * self._B[i + 1, -1]

    def segments_between(self, t_start: float, t_end: float, step: float | None = None):
        """Capsule segments of every pose sampled over ``[t_start, t_end]``.

        Returns ``(a, b, r)`` stacked over poses and links.
        """
        step = self.dt if step is None else step
        n = max(1, int(math.ceil((t_end - t_start) / step - 1e-9)))
        times = [t_start + min(i * step, t_end - t_start) for i in range(n + 1)]
        cfgs = [self.config_at(t) for t in times]
        return (np.concatenate([c.a for c in cfgs]), np.concatenate([c.b for c in cfgs]),
                np.concatenate([c.r for c in cfgs]))


def point_segment_closest(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances and closest points from each point to each segment.

    ``p`` is (P, 3); ``a``, ``b`` are (S, 3). Returns (P, S) distances and (P, S, 3) points.
    """
    p = np.atleast_2d(p)[:, None, :]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom < 1e-18, 1.0, denom)
    t = np.clip(np.einsum("psk,sk->ps", p - a[None], ab) / denom, 0.0, 1.0)
    q = a[None] + t[..., None] * ab[None]
    return np.linalg.norm(p - q, axis=-1), q


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return point_segment_closest(p, a, b)[0]


def segment_segment_distance(p0, p1, q0, q1) -> float:
    """Minimum distance between segments p0-p1 and q0-q1."""
    p0, p1, q0, q1 = (np.asarray(v, dtype=float) for v in (p0, p1, q0, q1))
    d1, d2, r = p1 - p0, q1 - q0, p0 - q0
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    eps = 1e-18
    if a <= eps and e <= eps:
        return float(np.linalg.norm(r))
    if a <= eps:
        s, t = 0.0, min(max(f / e, 0.0), 1.0)
    else:
        c = d1 @ r
        if e <= eps:
            t, s = 0.0, min(max(-c / a, 0.0), 1.0)
        else:
            b = d1 @ d2
            den = a * e - b * b
            s = min(max((b * f - c * e) / den, 0.0), 1.0) if den > eps else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t, s = 1.0, min(max((b - c) / a, 0.0), 1.0)
    return float(np.linalg.norm((p0 + d1 * s) - (q0 + d2 * t)))


def rotate_by_rotvec(v: np.ndarray, rotvec: np.ndarray) -> np.ndarray:
    th = float(np.linalg.norm(rotvec))
    if th < 1e-12:
        return np.asarray(v, dtype=float)
    return rodrigues_rotate(v, rotvec / th, th)


def sphere_centers(state: SceState, spheres) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.array([off for off, _ in spheres], dtype=float)
    radii = np.array([r for _, r in spheres], dtype=float)
    if np.any(offsets):
        offsets = np.array([rotate_by_rotvec(o, state.rotvec) for o in offsets])
    return state.position + offsets, radii


def collides(state: SceState, spheres, robot: RobotConfig) -> bool:
    """True iff any obstacle sphere overlaps any arm capsule."""
    centers, radii = sphere_centers(state, spheres)
    d = point_segment_distance(centers, robot.a, robot.b)
    return bool(np.any(d < radii[:, None] + robot.r[None, :]))


def inflate_velocity(v, a_max: float, t: float) -> np.ndarray:
    """Velocity under worst-case acceleration along its own direction.

    Accepts one velocity or a stack of them (one per row).
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    slow = n < 1e-9
    return np.where(slow, v, v * (1.0 + a_max * t * t / (2.0 * np.where(slow, 1.0, n))))


def cpe_formula(l: int, l_acc: int, observed: int, u: float) -> float:
    """Per-obstacle collision probability estimate from the collision flags.

    ``l`` is the collision flag at the predicted state, ``l_acc`` the flag under
    worst-case acceleration, ``observed`` the observation outcome.
    """
    return (1 - l) * l_acc * (observed - 1) * (u - 1) + l * (1 - observed * u)


def cpe_flags(sce: Sce, robot_next: RobotConfig, dt: float, a_max: float,
              t_accel: float | None = None) -> tuple[int, int]:
    """Collision flags (nominal, accelerated) over one interval of length ``dt``.

    The accelerated velocity assumes maximum acceleration for ``t_accel`` seconds
    (default ``dt``); a planner passes the time elapsed since planning started.
    """
    nominal = predict_state(sce.state, dt)
    l = int(collides(nominal, sce.spheres, robot_next))
    if l:
        # the accelerated branch is multiplied by (1 - l) and cannot contribute
        return 1, 0
    v_acc = inflate_velocity(sce.state.velocity, a_max, dt if t_accel is None else t_accel)
    acc = SceState(sce.state.position + dt * v_acc, nominal.rotvec, v_acc, nominal.angvel, nominal.u)
    return 0, int(collides(acc, sce.spheres, robot_next))


def cpe_single(sce: Sce, observed: bool, robot_next: RobotConfig, dt: float, a_max: float = 2.0,
               u: float | None = None, t_accel: float | None = None) -> float:
    """Collision probability estimate for one SCE over the next interval.

    ``sce`` is the belief at the start of the interval and ``robot_next`` the arm
    pose at its end. ``u`` overrides the certainty (planning passes the certainty
    the SCE will have after this interval's observation). ``t_accel`` is how long
    the obstacle may have been accelerating; it defaults to ``dt``.
    """
    l, l_acc = cpe_flags(sce, robot_next, dt, a_max, t_accel)
    return float(cpe_formula(l, l_acc, int(bool(observed)), sce.u if u is None else u))


def cpe_aggregate(per_sce: Sequence[float]) -> float:
    """Combine per-obstacle estimates assuming independence."""
    p = np.asarray(per_sce, dtype=float)
    if p.size == 0:
        return 0.0
    if np.any((p < 0.0) | (p > 1.0)) or not np.all(np.isfinite(p)):
        raise ValueError("per-SCE probabilities must lie in [0, 1]")
    return float(1.0 - np.prod(1.0 - p))


@dataclass(frozen=True)
class CpeReport:
    per_sce: dict
    aggregate: float

    @classmethod
    def from_values(cls, per_sce: dict) -> "CpeReport":
        return cls(dict(per_sce), cpe_aggregate(list(per_sce.values())))


def segments_distance_matrix(p0: np.ndarray, p1: np.ndarray, q0: np.ndarray, q1: np.ndarray) -> np.ndarray:
    """(N, M) minimum distances between segments ``p0[i]-p1[i]`` and ``q0[j]-q1[j]``."""
    p0, p1, q0, q1 = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (p0, p1, q0, q1))
    d1 = (p1 - p0)[:, None, :]
    d2 = (q1 - q0)[None, :, :]
    r = p0[:, None, :] - q0[None, :, :]
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    eps = 1e-18
    a_ok, e_ok = a > eps, e > eps
    a_s = np.where(a_ok, a, 1.0)
    e_s = np.where(e_ok, e, 1.0)
    den = a * e - b * b
    s = np.where(den > eps, np.clip((b * f - c * e) / np.where(den > eps, den, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / e_s
    lo, hi = t < 0.0, t > 1.0
    s = np.where(lo, np.clip(-c / a_s, 0.0, 1.0), np.where(hi, np.clip((b - c) / a_s, 0.0, 1.0), s))
    t = np.clip(t, 0.0, 1.0)
    # degenerate segments
    s = np.where(~a_ok, 0.0, s)
    t = np.where(~a_ok & e_ok, np.clip(f / e_s, 0.0, 1.0), t)
    s = np.where(a_ok & ~e_ok, np.clip(-c / a_s, 0.0, 1.0), s)
    t = np.where(~e_ok, 0.0, t)
    diff = (p0[:, None, :] + d1 * s[..., None]) - (q0[None, :, :] + d2 * t[..., None])
    return np.linalg.norm(diff, axis=-1)


def sight_blocked(origin: np.ndarray, points: np.ndarray, robot: RobotConfig, stop_short=None) -> np.ndarray:
    """Whether the straight line from ``origin`` to each point passes through an arm capsule.

    ``stop_short`` (per point) ends the sight line that far before the point, so a
    target's own surface contact with a capsule does not count as occlusion.
    """
    pts = np.atleast_2d(points)
    ends = pts
    if stop_short is not None:
        d = pts - origin
        n = np.linalg.norm(d, axis=1)
        keep = np.clip(1.0 - np.asarray(stop_short, dtype=float) / np.maximum(n, 1e-12), 0.0, 1.0)
        ends = origin + d * keep[:, None]
    starts = np.broadcast_to(origin, ends.shape)
    dist = segments_distance_matrix(starts, ends, robot.a, robot.b)
    return np.any(dist < robot.r[None, :], axis=1)
