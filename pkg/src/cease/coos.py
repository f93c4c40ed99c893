"""View-trajectory search for the active cameras.

Candidate pointing targets come from the arm's end effector, the known
obstacles and the most threatening safe-region cells. Short trajectories are
enumerated toward those targets under the servo slew limit, and each one is
scored by rolling a cloned belief and safe region forward under the views it
would produce:

    J = sum_j gamma^j ln(1 - p_j) + alpha^j ln p(s_{j+1} | s_j)

where ``p_j`` is the aggregate collision probability estimate of interval ``j``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .belief import BeliefParams, Sce, WorldBelief, certainty_valid, neighborhood_probability
from .collision import RobotTrajectory, inflate_velocity, point_segment_distance, sight_blocked
from .geometry import (CameraModel, VisionState, angles_to, angular_distance, direction_to_vision_state,
                       in_fov_many, step_toward)
from .safe_region import (DEFAULT_POTENTIAL_RADIUS, DEFAULT_SPAWN_CAP, SafeRegion, evolve, point_keys, potential_arrays,
                          potential_prior, ThreatScan, threatening_cells, visibility_mask)

#: scores within this of the best count as tied; the earliest trajectory wins
TIE_TOL = 1e-9
#: largest collision probability passed to the logarithm
P_CEILING = 1.0 - 1e-9


@dataclass(frozen=True)
class PlannerParams:
    """Search settings. ``gamma = 0`` is accepted to switch off the risk terms in tests."""

    t_p: float = 1.0
    n_p: int = 5
    gamma: float = 0.9
    alpha: float = 0.6
    sigma_t: float = 0.5
    max_trajectories: int = 64
    k_safe: int = 4
    r_h: float = DEFAULT_POTENTIAL_RADIUS
    spawn_cap: int = DEFAULT_SPAWN_CAP

    def __post_init__(self):
        if self.t_p <= 0 or self.n_p < 1:
            raise ValueError("t_p must be positive and n_p at least 1")
        if not (0.0 <= self.gamma < 1.0) or not (0.0 < self.alpha < 1.0):
            raise ValueError("gamma must lie in [0, 1) and alpha in (0, 1)")
        if self.sigma_t <= 0 or self.max_trajectories < 1 or self.k_safe < 0:
            raise ValueError("sigma_t and max_trajectories must be positive, k_safe non-negative")

    @property
    def dt(self) -> float:
        return self.t_p / self.n_p


@dataclass(frozen=True)
class ActionTarget:
    """A direction worth looking at; ``point`` is the world point behind it."""

    kind: str
    aim: VisionState
    source: object
    point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("a_traj", "a_obs", "a_safe"):
            raise ValueError(f"unknown target kind {self.kind!r}")


@dataclass(frozen=True)
class ViewTrajectory:
    """``states[j]`` is the pointing direction reached at the end of step ``j``."""

    states: tuple
    options: tuple = ()
    log_transition: tuple = ()
    score: float = -math.inf

    def with_score(self, score: float) -> "ViewTrajectory":
        return ViewTrajectory(self.states, self.options, self.log_transition, float(score))

    @classmethod
    def hold(cls, s: VisionState, n_p: int) -> "ViewTrajectory":
        return cls((s,) * n_p, (0,) * n_p, (0.0,) * n_p)


def _state_key(s: VisionState) -> tuple[float, float]:
    return (round(s.azimuth, 12), round(s.elevation, 12))


def _unique_states(states: Sequence[VisionState]) -> list[VisionState]:
    seen, out = set(), []
    for s in states:
        k = _state_key(s)
        if k not in seen:
            seen.add(k)
            out.append(s)
    return out


def _log_softmax(prev: VisionState, cands: Sequence[VisionState], sigma_t: float) -> list[float]:
    logits = [-angular_distance(prev, c) / sigma_t for c in cands]
    m = max(logits)
    lse = m + math.log(math.fsum(math.exp(x - m) for x in logits))
    return [x - lse for x in logits]


def _log_transition(prev: VisionState, nxt: VisionState, candidates: Sequence[VisionState], sigma_t: float) -> float:
    cands = _unique_states(candidates)
    keys = [_state_key(c) for c in cands]
    if _state_key(nxt) not in keys:
        raise ValueError("next state is not among the candidates")
    return _log_softmax(prev, cands, sigma_t)[keys.index(_state_key(nxt))]


def transition_prob(prev: VisionState, nxt: VisionState, candidates: Sequence[VisionState], sigma_t: float) -> float:
    """Softmax of ``-angular_distance(prev, c) / sigma_t`` over distinct candidates, evaluated at ``nxt``."""
    if sigma_t <= 0:
        raise ValueError("sigma_t must be positive")
    return math.exp(_log_transition(prev, nxt, candidates, sigma_t))


def gen_states(belief: WorldBelief, sr: SafeRegion | Sequence[SafeRegion], robot_traj: RobotTrajectory,
               camera: CameraModel, params: PlannerParams, t0: float = 0.0) -> list[ActionTarget]:
    """Pointing targets for one camera, in the order end effector, obstacles by id, safe cells by index.

    Targets closer than half a grid cell's angular radius to an earlier one are dropped.
    """
    srs = [sr] if isinstance(sr, SafeRegion) else list(sr)
    origin = camera.origin_array
    dt = params.dt
    raw: list[tuple[str, object, np.ndarray]] = []
    for j in range(params.n_p):
        t = t0 + (j + 1) * dt
        raw.append(("a_traj", round(t, 9), robot_traj.end_effector_at(t)))
    for s in sorted((s for s in belief.sces if s.kind == "known"), key=lambda s: s.id):
        raw.append(("a_obs", s.id, s.state.position + dt * s.state.velocity))
    if params.k_safe > 0:
        segments = robot_traj.segments_between(t0, t0 + params.t_p, params.dt)
        for si, region in enumerate(srs):
            cells, clearance, _ = threatening_cells(region, segments, params.t_p, params.r_h)
            if cells.size == 0:
                continue
            pick = np.sort(cells[np.lexsort((cells, clearance))[:params.k_safe]])
            for k in pick:
                point = region.origin + region.depth[k] * region.grid.units[k]
                if np.linalg.norm(point - origin) < 1e-9:
                    point = origin + region.grid.units[k]
                raw.append(("a_safe", int(k) if len(srs) == 1 else (si, int(k)), point))
    tol = 0.5 * float(np.min(srs[0].grid.angular_radius)) if srs else 0.0
    out: list[ActionTarget] = []
    units: list[np.ndarray] = []
    for kind, source, point in raw:
        try:
            aim = camera.clamp(direction_to_vision_state(point, origin))
        except ValueError:
            continue
        u = aim.unit()
        if units and np.min(angles_to(u, np.array(units))) < tol:
            continue
        units.append(u)
        out.append(ActionTarget(kind, aim, source, tuple(float(c) for c in point)))
    return out


def _option_sequences(n_opt: int, n_p: int):
    """Option index sequences ordered by number of switches.

    Option 0 holds the current direction. Within a switch count, switch
    positions follow combination order and segment options follow product order
    with consecutive segments distinct.
    """
    for n_sw in range(n_p):
        for cuts in itertools.combinations(range(1, n_p), n_sw):
            bounds = (0,) + cuts + (n_p,)
            for opts in itertools.product(range(n_opt), repeat=n_sw + 1):
                if any(a == b for a, b in zip(opts, opts[1:])):
                    continue
                seq = []
                for o, lo, hi in zip(opts, bounds, bounds[1:]):
                    seq.extend([o] * (hi - lo))
                yield tuple(seq)


def gen_trajs(targets: Sequence[ActionTarget], s_v0: VisionState, camera: CameraModel,
              params: PlannerParams) -> list[ViewTrajectory]:
    """Enumerate slew-limited trajectories toward the targets, hold first.

    Trajectories that visit the same states as an earlier one are dropped and the
    list is cut at ``max_trajectories``.
    """
    s0 = camera.clamp(s_v0)
    aims = [camera.clamp(t.aim) for t in targets]
    max_step = camera.max_slew_rate * params.dt
    n_opt = len(aims) + 1
    step_memo: dict = {}
    cand_memo: dict = {}

    def step(prev: VisionState, o: int) -> VisionState:
        key = (prev, o)
        if key not in step_memo:
            step_memo[key] = prev if o == 0 else step_toward(prev, aims[o - 1], max_step)
        return step_memo[key]

    def log_p(prev: VisionState, nxt: VisionState) -> float:
        if prev not in cand_memo:
            cands = _unique_states([step(prev, o) for o in range(n_opt)])
            cand_memo[prev] = dict(zip((_state_key(c) for c in cands),
                                       _log_softmax(prev, cands, params.sigma_t)))
        return cand_memo[prev][_state_key(nxt)]

    seen: set = set()
    out: list[ViewTrajectory] = []
    for seq in _option_sequences(n_opt, params.n_p):
        prev, states, logs = s0, [], []
        for o in seq:
            nxt = step(prev, o)
            logs.append(log_p(prev, nxt))
            states.append(nxt)
            prev = nxt
        key = tuple(_state_key(s) for s in states)
        if key in seen:
            continue
        seen.add(key)
        out.append(ViewTrajectory(tuple(states), seq, tuple(logs)))
        if len(out) >= params.max_trajectories:
            break
    return out


def _wrap_rotvecs(o: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(o, axis=1)
    big = n > math.pi
    if not np.any(big):
        return o
    theta = np.where(big, n % (2.0 * math.pi), n)
    theta = np.where(theta > math.pi, theta - 2.0 * math.pi, theta)
    scale = np.where(big, theta / np.where(n > 0, n, 1.0), 1.0)
    return o * scale[:, None]


@dataclass(frozen=True, eq=False)
class _Batch:
    """Struct-of-arrays copy of a list of SCEs for fast rollouts.

    Covariances are kept as they were on entry; an unobserved step is the only
    thing that changes them, so ``n_hidden`` counts those steps instead.
    """

    ids: tuple
    pos: np.ndarray
    rot: np.ndarray
    vel: np.ndarray
    angvel: np.ndarray
    u: np.ndarray
    cov_pos: np.ndarray
    cov_vel: np.ndarray
    cov_angvel: np.ndarray
    sph_owner: np.ndarray
    sph_off: np.ndarray
    sph_r: np.ndarray
    n_hidden: np.ndarray

    @classmethod
    def from_sces(cls, sces: Sequence[Sce]) -> "_Batch":
        n = len(sces)
        owner, off, rad = [], [], []
        for i, s in enumerate(sces):
            for o, r in s.spheres:
                owner.append(i)
                off.append(o)
                rad.append(r)

        def stack(get, shape):
            return np.array([get(s) for s in sces], dtype=float).reshape((n,) + shape)

        return cls(tuple(s.id for s in sces),
                   stack(lambda s: s.state.position, (3,)), stack(lambda s: s.state.rotvec, (3,)),
                   stack(lambda s: s.state.velocity, (3,)), stack(lambda s: s.state.angvel, (3,)),
                   np.array([s.u for s in sces], dtype=float),
                   stack(lambda s: s.cov.pos, (3, 3)), stack(lambda s: s.cov.vel, (3, 3)),
                   stack(lambda s: s.cov.angvel, (3, 3)),
                   np.array(owner, dtype=np.intp), np.array(off, dtype=float).reshape(-1, 3),
                   np.array(rad, dtype=float), np.zeros(n, dtype=np.intp))

    def __len__(self) -> int:
        return len(self.ids)

    def extend(self, other: "_Batch") -> "_Batch":
        if len(other) == 0:
            return self
        if len(self) == 0:
            return other
        cat = np.concatenate
        return _Batch(self.ids + other.ids, cat([self.pos, other.pos]), cat([self.rot, other.rot]),
                      cat([self.vel, other.vel]), cat([self.angvel, other.angvel]), cat([self.u, other.u]),
                      cat([self.cov_pos, other.cov_pos]), cat([self.cov_vel, other.cov_vel]),
                      cat([self.cov_angvel, other.cov_angvel]),
                      cat([self.sph_owner, other.sph_owner + len(self)]), cat([self.sph_off, other.sph_off]),
                      cat([self.sph_r, other.sph_r]), cat([self.n_hidden, other.n_hidden]))

    def first_radius(self) -> np.ndarray:
        out = np.zeros(len(self))
        # the first sphere listed for each owner
        first = np.unique(self.sph_owner, return_index=True)[1]
        out[self.sph_owner[first]] = self.sph_r[first]
        return out

    def predicted_rot(self, dt: float) -> np.ndarray:
        w = np.linalg.norm(self.angvel, axis=1)
        spin = w >= 1e-9
        if not np.any(spin):
            return self.rot
        r = self.angvel / np.where(spin, w, 1.0)[:, None]
        th = w * dt
        c, s = np.cos(th)[:, None], np.sin(th)[:, None]
        o = self.rot
        rotated = c * o + (1.0 - c) * np.sum(o * r, axis=1)[:, None] * r + s * np.cross(r, o)
        return _wrap_rotvecs(np.where(spin[:, None], rotated, o))

    def sphere_centres(self, pos: np.ndarray, rot: np.ndarray) -> np.ndarray:
        off = self.sph_off
        if np.any(off):
            rv = rot[self.sph_owner]
            th = np.linalg.norm(rv, axis=1)
            turn = th >= 1e-12
            r = rv / np.where(turn, th, 1.0)[:, None]
            c, s = np.cos(th)[:, None], np.sin(th)[:, None]
            rotated = c * off + (1.0 - c) * np.sum(off * r, axis=1)[:, None] * r + s * np.cross(r, off)
            off = np.where(turn[:, None], rotated, off)
        return pos[self.sph_owner] + off


class _Rollout:
    """Shared per-replan data for scoring many trajectories of one camera rig."""

    def __init__(self, srs: Sequence[SafeRegion], belief: WorldBelief, robot_traj: RobotTrajectory,
                 cameras: Sequence[CameraModel], params: PlannerParams, bparams: BeliefParams, t0: float):
        self.srs = list(srs)
        self.cameras = list(cameras)
        self.params = params
        self.bparams = bparams
        self.dt = params.dt
        dt = self.dt
        self.robots = [robot_traj.config_at(t0 + (j + 1) * dt) for j in range(params.n_p)]
        self.windows = [robot_traj.segments_between(t0 + j * dt, t0 + j * dt + params.t_p, dt)
                        for j in range(params.n_p)]
        self.prior = potential_prior(bparams)
        self._empty = _Batch.from_sces(())
        self.base = _Batch.from_sces(belief.sces)
        self.u_valid = certainty_valid(bparams.sensor_cov, bparams)
        self.accel_outer = np.outer(bparams.accel, bparams.accel)
        self._mask_memo: dict = {}
        self._u_memo: dict = {}
        self._node_memo: dict = {}
        self._geom_memo: dict = {}
        self._spawn_memo: dict = {}
        self._fov_memo: dict = {}
        self._evolve_memo: dict = {}
        self._threat_memo: dict = {}
        self._scans: dict = {}
        self._intern: dict = {}

    def _mask(self, si: int, axes: tuple) -> np.ndarray:
        key = (si, axes)
        out = self._mask_memo.get(key)
        if out is None:
            # the union of per-camera masks; each depends on one axis only
            out = np.zeros(self.srs[si].grid.n_cells, dtype=bool)
            for ci, axis in enumerate(axes):
                ck = (si, ci, axis)
                m = self._mask_memo.get(ck)
                if m is None:
                    m = self._mask_memo[ck] = visibility_mask(self.srs[si], self.cameras[ci:ci + 1], (axis,))
                out = out | m
            self._mask_memo[key] = out
        return out

    def _evolve(self, si: int, sr: SafeRegion, axes: tuple) -> SafeRegion:
        """Evolved region, interned by depth so equal regions are one object.

        Interning lets the spawn memo, keyed on region identity, hit across
        branches that reached the same depth field by different views.
        """
        key = (id(sr), si, axes)
        out = self._evolve_memo.get(key)
        if out is None:
            nxt = evolve(sr, self._mask(si, axes), self.dt)
            out = self._intern.setdefault((si, nxt.depth.tobytes()), nxt)
            self._evolve_memo[key] = out
        return out

    def _u_invalid(self, b: _Batch, rows: np.ndarray) -> np.ndarray:
        batch_key = (b.ids, b.n_hidden.tobytes(), rows.tobytes())
        out = self._u_memo.get(batch_key)
        if out is not None:
            return out
        vals = []
        for i, k in zip(rows.tolist(), b.n_hidden[rows].tolist()):
            key = (b.cov_pos[i].tobytes(), b.cov_vel[i].tobytes(), b.cov_angvel[i].tobytes(), k)
            u = self._u_memo.get(key)
            if u is None:
                u = self._u_memo[key] = self._certainty_after(b, i)
            vals.append(u)
        out = self._u_memo[batch_key] = np.array(vals)
        return out

    def _certainty_after(self, b: _Batch, i: int) -> float:
        """Certainty lost over one more unseen step after ``n_hidden[i]`` earlier ones."""
        dt, bp = self.dt, self.bparams
        cov_pos, cov_vel = b.cov_pos[i], b.cov_vel[i]
        for _ in range(int(b.n_hidden[i])):
            cov_pos, cov_vel = cov_pos + dt * dt * cov_vel, cov_vel + dt * dt * self.accel_outer
        return (neighborhood_probability(cov_pos + dt * dt * cov_vel, bp.r_p)
                * neighborhood_probability(dt * dt * b.cov_angvel[i], bp.r_o))

    def _geometry(self, b: _Batch, j: int):
        """Branch-independent facts about a batch at step ``j``, memoized.

        Positions evolve the same way whether or not anything is seen, so the
        predicted poses, both collision flags and per-camera sight-line blocking
        are shared by every trajectory that reaches the same batch.
        """
        key = (j, b.ids, b.pos.tobytes(), b.rot.tobytes(), b.vel.tobytes())
        hit = self._geom_memo.get(key)
        if hit is not None:
            return hit
        dt = self.dt
        pos_next = b.pos + dt * b.vel
        rot_next = b.predicted_rot(dt)
        l = self._collides(b, pos_next, rot_next, j)
        # worst-case acceleration counts from the start of planning
        v_acc = inflate_velocity(b.vel, self.bparams.a_max, (j + 1) * dt)
        l_acc = ~l & self._collides(b, b.pos + dt * v_acc, rot_next, j)
        short = b.first_radius()
        blocked = [sight_blocked(cam.origin_array, pos_next, self.robots[j], short) for cam in self.cameras]
        hit = (pos_next, rot_next, l, l_acc, blocked)
        self._geom_memo[key] = hit
        return hit

    def _observed(self, pos_next: np.ndarray, blocked: list, axes: tuple) -> np.ndarray:
        seen = np.zeros(len(pos_next), dtype=bool)
        for ci, (cam, axis, blk) in enumerate(zip(self.cameras, axes, blocked)):
            # pos_next comes from the geometry memo, so its identity is a stable key
            key = (ci, axis, id(pos_next))
            vis = self._fov_memo.get(key)
            if vis is None:
                vis = self._fov_memo[key] = in_fov_many(cam, axis.unit(), pos_next) & ~blk
            seen |= vis
        return seen

    def _collides(self, b: _Batch, pos: np.ndarray, rot: np.ndarray, j: int) -> np.ndarray:
        robot = self.robots[j]
        if len(b.sph_r) == 0:
            return np.zeros(len(b), dtype=bool)
        centres = b.sphere_centres(pos, rot)
        d = point_segment_distance(centres, robot.a, robot.b)
        hit = np.any(d < b.sph_r[:, None] + robot.r[None, :], axis=1)
        return np.bincount(b.sph_owner, weights=hit, minlength=len(b)) > 0

    def _scanner(self, si: int, j: int) -> ThreatScan:
        key = (si, j)
        scan = self._scans.get(key)
        if scan is None:
            sr, p = self.srs[si], self.params
            scan = self._scans[key] = ThreatScan(sr.grid, sr.origin, sr.d_max, sr.v_max, self.windows[j],
                                                 p.t_p, p.r_h)
        return scan

    def _spawn(self, srs: list, spawned: tuple, j: int) -> tuple[_Batch, tuple]:
        # siblings share their parent's regions, so the result is shared too
        key = (tuple(id(sr) for sr in srs), spawned, j)
        hit = self._spawn_memo.get(key)
        if hit is None:
            hit = self._spawn_memo[key] = (srs, self._spawn_uncached(srs, spawned, j))
        return hit[1]

    def _spawn_uncached(self, srs: list, spawned: tuple, j: int) -> tuple[_Batch, tuple]:
        p = self.params
        ids, pos, vel, out = [], [], [], []
        for si, sr in enumerate(srs):
            room = p.spawn_cap - len(spawned[si])
            cells = ()
            if room > 0:
                tk = (id(sr), j)
                threat = self._threat_memo.get(tk)
                if threat is None:
                    threat = self._threat_memo[tk] = (sr, self._scanner(si, j)(sr))
                cells, x, v = potential_arrays(sr, self.windows[j], p.t_p, p.r_h, room,
                                               exclude_points=spawned[si], threat=threat[1])
                ids.extend(f"potential{si}:{int(k)}" for k in cells)
                pos.append(x)
                vel.append(v)
                out.append(spawned[si] | frozenset(point_keys(x)))
            else:
                out.append(spawned[si])
        return self._potential_batch(tuple(ids), pos, vel), tuple(out)

    def _potential_batch(self, ids: tuple, pos: list, vel: list) -> _Batch:
        n = len(ids)
        if n == 0:
            return self._empty
        zeros = np.zeros((n, 3))
        prior = self.prior
        rep = lambda m: np.broadcast_to(m, (n, 3, 3))
        return _Batch(ids, np.concatenate(pos), zeros, np.concatenate(vel), zeros, np.zeros(n),
                      rep(prior.pos), rep(prior.vel), rep(prior.angvel), np.arange(n), zeros,
                      np.full(n, self.params.r_h), np.zeros(n, dtype=np.intp))

    def step(self, node, axes: tuple, j: int):
        """Advance one interval; returns the child node and this interval's aggregate CPE."""
        srs, b, spawned = node
        if srs is not None:
            pots, spawned = self._spawn(srs, spawned, j)
            b = b.extend(pots)
            if all(len(s) >= self.params.spawn_cap for s in spawned) or j + 1 == self.params.n_p:
                # the regions only feed spawning, which is finished
                srs = None
            else:
                srs = [self._evolve(si, sr, axes) for si, sr in enumerate(srs)]
        dt = self.dt
        if len(b) == 0:
            return (srs, b, spawned), 0.0, np.zeros(0)
        pos_next, rot_next, l, l_acc, blocked = self._geometry(b, j)
        obs = self._observed(pos_next, blocked, axes)
        u_new = np.full(len(b), self.u_valid)
        hidden = np.flatnonzero(~obs)
        if hidden.size:
            u_new[hidden] = self._u_invalid(b, hidden)
        # collision probability from the interval's start state with the updated certainty
        lf, laf, of = l.astype(float), l_acc.astype(float), obs.astype(float)
        p_each = (1.0 - lf) * laf * (of - 1.0) * (u_new - 1.0) + lf * (1.0 - of * u_new)
        agg = 1.0 - float(np.prod(1.0 - p_each))
        nb = _Batch(b.ids, pos_next, rot_next, b.vel, b.angvel, u_new, b.cov_pos, b.cov_vel, b.cov_angvel,
                    b.sph_owner, b.sph_off, b.sph_r, b.n_hidden + ~obs)
        return (srs, nb, spawned), agg, p_each

    def risk_terms(self, axes_seq: Sequence[tuple]) -> list[float]:
        """Aggregate CPE per interval for a sequence of per-step rig axes, memoized on prefixes."""
        node = (self.srs, self.base, tuple(frozenset() for _ in self.srs))
        out = []
        prefix: tuple = ()
        for j, axes in enumerate(axes_seq):
            prefix = prefix + (axes,)
            hit = self._node_memo.get(prefix)
            if hit is None:
                child, agg, _ = self.step(node, axes, j)
                hit = (child, agg)
                self._node_memo[prefix] = hit
            node = hit[0]
            out.append(hit[1])
        return out

    def score(self, risks: Sequence[float], log_transition: Sequence[float]) -> float:
        g, a = self.params.gamma, self.params.alpha
        J = 0.0
        for j, (p, lt) in enumerate(zip(risks, log_transition)):
            J += g ** j * math.log(1.0 - min(p, P_CEILING)) + a ** j * lt
        return J


def _rig_axes(traj: ViewTrajectory, others: Sequence[ViewTrajectory], n_p: int) -> list[tuple]:
    return [(traj.states[j],) + tuple(o.states[j] for o in others) for j in range(n_p)]


def evaluate_trajectory(traj: ViewTrajectory, sr, belief: WorldBelief, robot_traj: RobotTrajectory,
                        cameras: Sequence[CameraModel], params: PlannerParams,
                        bparams: BeliefParams | None = None, t0: float = 0.0,
                        others: Sequence[ViewTrajectory] = ()) -> float:
    """Score one trajectory for ``cameras[0]``; ``others`` are the fixed plans of ``cameras[1:]``.

    ``sr`` is one safe region or one per camera. Inputs are left untouched.
    """
    srs = [sr] if isinstance(sr, SafeRegion) else list(sr)
    roll = _Rollout(srs, belief, robot_traj, list(cameras)[:1 + len(others)], params, bparams or BeliefParams(), t0)
    risks = roll.risk_terms(_rig_axes(traj, others, params.n_p))
    return roll.score(risks, traj.log_transition)


def _argmax_first(scores: Sequence[float]) -> int:
    best = max(scores)
    for i, s in enumerate(scores):
        if s >= best - TIE_TOL:
            return i
    return 0


def coos_search(s_v0: VisionState, sr, belief: WorldBelief, robot_traj: RobotTrajectory,
                cameras: Sequence[CameraModel], params: PlannerParams, bparams: BeliefParams | None = None,
                t0: float = 0.0, others: Sequence[ViewTrajectory] = (), targets: Sequence[ActionTarget] | None = None,
                trace: list | None = None) -> ViewTrajectory:
    """Best trajectory for ``cameras[0]`` starting from ``s_v0``.

    ``others`` hold the committed trajectories of ``cameras[1:]``. Scores within
    :data:`TIE_TOL` of the best go to the earliest enumerated trajectory. When
    ``trace`` is a list, one JSON line describing the search is appended to it.
    """
    bparams = bparams or BeliefParams()
    srs = [sr] if isinstance(sr, SafeRegion) else list(sr)
    camera = cameras[0]
    if targets is None:
        targets = gen_states(belief, srs, robot_traj, camera, params, t0)
    trajs = gen_trajs(targets, s_v0, camera, params)
    roll = _Rollout(srs, belief, robot_traj, list(cameras)[:1 + len(others)], params, bparams, t0)
    scores = [roll.score(roll.risk_terms(_rig_axes(tr, others, params.n_p)), tr.log_transition) for tr in trajs]
    best = _argmax_first(scores)
    chosen = trajs[best].with_score(scores[best])
    if trace is not None:
        trace.append(json.dumps({
            "t": round(t0, 9), "candidates": len(trajs), "scores": [round(s, 12) for s in scores],
            "chosen": best, "states": [list(s.as_tuple()) for s in chosen.states]}))
    return chosen


def _covered(camera: CameraModel, traj: ViewTrajectory, point) -> bool:
    p = np.asarray(point, dtype=float)[None, :]
    return any(bool(in_fov_many(camera, s.unit(), p)[0]) for s in traj.states)


def plan_rig(axes: Sequence[VisionState], srs: Sequence[SafeRegion], belief: WorldBelief,
             robot_traj: RobotTrajectory, cameras: Sequence[CameraModel], params: PlannerParams,
             bparams: BeliefParams | None = None, t0: float = 0.0, trace: list | None = None) -> list[ViewTrajectory]:
    """Plan every camera in turn, each against the plans already chosen.

    Cameras not yet planned are assumed to hold their current direction. A later
    camera drops obstacle and safe-region targets already covered by an earlier
    camera's plan; end-effector targets are always kept.
    """
    bparams = bparams or BeliefParams()
    cameras = list(cameras)
    plans = [ViewTrajectory.hold(cam.clamp(a), params.n_p) for cam, a in zip(cameras, axes)]
    for c, cam in enumerate(cameras):
        targets = gen_states(belief, srs, robot_traj, cam, params, t0)
        if c > 0:
            targets = [tg for tg in targets if tg.kind == "a_traj"
                       or not any(_covered(cameras[k], plans[k], tg.point) for k in range(c))]
        order = [c] + [k for k in range(len(cameras)) if k != c]
        plans[c] = coos_search(axes[c], srs, belief, robot_traj, [cameras[k] for k in order], params, bparams,
                               t0, others=[plans[k] for k in order[1:]], targets=targets, trace=trace)
    return plans
