"""Ground truth and synthetic observations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..belief import SceCovariance, SceState
from ..collision import point_segment_distance, sight_blocked
from ..geometry import VisionState, in_fov_many
from .scenario import PART_NAMES, Scenario


@dataclass(frozen=True, eq=False)
class WorldState:
    """Part ids, centres, velocities and radii at one instant (rows follow ``Scenario.part_ids``)."""

    t: float
    ids: tuple
    positions: np.ndarray
    velocities: np.ndarray
    radii: np.ndarray


@dataclass(frozen=True, eq=False)
class Observation:
    """Per camera and part: ``valid[c, p]`` and the noisy state ``measurements[c][p]``."""

    t: float
    valid: np.ndarray
    measurements: tuple

    @property
    def any_valid(self) -> np.ndarray:
        return np.any(self.valid, axis=0)


def step_world(scn: Scenario, t: float) -> WorldState:
    """Closed-form part poses at time ``t``; velocities are exact derivatives."""
    if t < 0 or t > scn.duration + 1e-9:
        raise ValueError(f"time {t} outside [0, {scn.duration}]")
    pos, vel, rad = [], [], []
    for h in scn.humanoids:
        p, v = h.poses(t)
        pos.append(p)
        vel.append(v)
        rad.append(h.radii())
    if not pos:
        return WorldState(t, (), np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0))
    return WorldState(t, tuple(scn.part_ids), np.concatenate(pos), np.concatenate(vel), np.concatenate(rad))


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(0.5 * (m + m.T))
    return vec * np.sqrt(np.clip(lam, 0.0, None))


def noise_draws(scn: Scenario, step: int, n_cameras: int, n_parts: int) -> np.ndarray:
    """Standard normal draws for one step, shaped (camera, part, 12).

    Each step has its own stream keyed by the scenario seed, so the draws do not
    depend on what any policy did before.
    """
    rng = np.random.default_rng([scn.seed, step])
    return rng.standard_normal((n_cameras, n_parts, 12))


def _noisy(truth_pos, truth_vel, z: np.ndarray, cov: SceCovariance) -> SceState:
    s = [_sqrt_psd(b) for b in cov.blocks()]
    return SceState(truth_pos + s[0] @ z[0:3], s[1] @ z[3:6], truth_vel + s[2] @ z[6:9], s[3] @ z[9:12])


def occluded(scn: Scenario, world: WorldState, origin: np.ndarray, robot=None) -> np.ndarray:
    """Whether each part's sight line from ``origin`` is cut by the arm or another part."""
    n = len(world.ids)
    if n == 0:
        return np.zeros(0, dtype=bool)
    robot = robot if robot is not None else scn.robot.config_at(world.t)
    blocked = sight_blocked(origin, world.positions, robot, world.radii)
    # sight segments end short of the target so its own surface is not in the way
    d = world.positions - origin
    dist = np.linalg.norm(d, axis=1)
    keep = np.clip(1.0 - world.radii / np.maximum(dist, 1e-12), 0.0, 1.0)
    ends = origin + d * keep[:, None]
    starts = np.broadcast_to(origin, ends.shape)
    # distances from every sphere centre (rows) to every sight segment (columns)
    gap = point_segment_distance(world.positions, starts, ends)
    hit = gap < world.radii[:, None]
    np.fill_diagonal(hit, False)
    return blocked | np.any(hit, axis=0)


def observe(scn: Scenario, t: float, optical_axes: Sequence[VisionState], world: WorldState | None = None) -> Observation:
    """Which parts each camera sees at ``t`` and the noisy measurements of every part.

    A part is seen when its centre is inside the view cone and range and the sight
    line clears the arm capsules and all other parts. Noise is drawn for every
    camera and part (camera-major, part-minor) whether or not the part is seen.
    """
    world = world if world is not None else step_world(scn, t)
    cams = [c.model for c in scn.cameras]
    if len(optical_axes) != len(cams):
        raise ValueError("need one optical axis per camera")
    n = len(world.ids)
    valid = np.zeros((len(cams), n), dtype=bool)
    robot = scn.robot.config_at(t)
    for c, (cam, axis) in enumerate(zip(cams, optical_axes)):
        if n:
            valid[c] = in_fov_many(cam, axis.unit(), world.positions) & ~occluded(scn, world, cam.origin_array, robot)
    z = noise_draws(scn, int(round(t / scn.dt)), len(cams), n)
    meas = tuple(tuple(_noisy(world.positions[p], world.velocities[p], z[c, p], scn.belief.sensor_cov)
                       for p in range(n)) for c in range(len(cams)))
    return Observation(t, valid, meas)


def part_name(part_id: str) -> str:
    name = part_id.rsplit(":", 1)[-1]
    if name not in PART_NAMES:
        raise ValueError(f"not a part id: {part_id!r}")
    return name
