"""Random small planning instances shared by the search tests and the acceptance run."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cease.belief import BeliefParams, Sce, SceCovariance, SceState, WorldBelief
from cease.collision import RobotConfig, RobotTrajectory
from cease.coos import ActionTarget, PlannerParams, ViewTrajectory
from cease.geometry import CameraModel, SphericalGrid, VisionState, direction_to_vision_state
from cease.safe_region import RESET, SafeRegion

GRID = (8, 4)


@dataclass
class Instance:
    s_v0: VisionState
    srs: list
    belief: WorldBelief
    robot: RobotTrajectory
    cameras: list
    params: PlannerParams
    bparams: BeliefParams
    t0: float
    targets: list
    others: list


def _arm(rng, shift) -> RobotConfig:
    top = np.array([0.0, 0.0, 0.4])
    elbow = top + np.array([0.3, 0.0, 0.1]) + shift
    ee = elbow + np.array([0.25, 0.1, -0.1]) + 0.5 * shift
    return RobotConfig.from_links([((0, 0, 0), top, 0.06), (top, elbow, 0.05), (elbow, ee, 0.04)])


def random_instance(seed: int, max_targets: int = 3, max_np: int = 3) -> Instance:
    rng = np.random.default_rng(seed)
    n_p = int(rng.integers(1, max_np + 1))
    robot = RobotTrajectory(tuple(_arm(rng, rng.normal(0, 0.1, 3)) for _ in range(4)), 0.25, loop=bool(rng.random() < 0.5))
    two = rng.random() < 0.4
    origins = [(-0.3, 0.4, 0.5), (-0.3, -0.4, 0.5)][: 2 if two else 1]
    cameras = [CameraModel(tuple(np.array(o) + rng.normal(0, 0.05, 3)), math.radians(rng.uniform(25, 40)), 2.0,
                           rng.uniform(1.0, 4.0)) for o in origins]
    grid = SphericalGrid(*GRID)
    srs = []
    for cam in cameras:
        depth = rng.uniform(0.2, 2.0, grid.n_cells)
        depth[rng.random(grid.n_cells) < 0.4] = 2.0
        depth[rng.random(grid.n_cells) < 0.08] = 0.0
        srs.append(SafeRegion(grid, depth, cam.origin, 2.0, 1.0, np.full(grid.n_cells, RESET)))
    sces = []
    for i in range(int(rng.integers(0, 3))):
        pos = np.array([0.5, 0.0, 0.4]) + rng.normal(0, 0.35, 3)
        toward = np.array([0.3, 0.0, 0.45]) - pos
        vel = toward / np.linalg.norm(toward) * rng.uniform(0.0, 1.5) + rng.normal(0, 0.2, 3)
        spheres = (((0.0, 0.0, 0.0), rng.uniform(0.05, 0.2)),)
        if rng.random() < 0.5:
            spheres += ((tuple(rng.normal(0, 0.15, 3)), rng.uniform(0.04, 0.1)),)
        cov = SceCovariance.isotropic(*rng.uniform(0.01, 0.1, 4))
        st = SceState(pos, rng.normal(0, 0.5, 3), vel, rng.normal(0, 1.0, 3), rng.uniform(0.2, 1.0))
        sces.append(Sce(f"h{i}", st, cov, "known", spheres))
    t_p = 0.2 * n_p
    params = PlannerParams(t_p=t_p, n_p=n_p, gamma=0.9, alpha=0.6, sigma_t=float(rng.uniform(0.2, 1.0)),
                           max_trajectories=int(rng.choice([200, 8])), k_safe=2,
                           r_h=0.15, spawn_cap=int(rng.integers(1, 6)))
    bparams = BeliefParams(a_max=float(rng.uniform(0.5, 4.0)))
    cam = cameras[0]
    look = direction_to_vision_state(np.array([0.4, 0.0, 0.3]) + rng.normal(0, 0.3, 3), cam.origin)
    s_v0 = VisionState(look.azimuth + rng.normal(0, 0.5), float(np.clip(look.elevation + rng.normal(0, 0.3), -1.4, 1.4)))
    targets = []
    for i in range(int(rng.integers(1, max_targets + 1))):
        pt = np.array([0.4, 0.0, 0.4]) + rng.normal(0, 0.5, 3)
        targets.append(ActionTarget("a_obs", direction_to_vision_state(pt, cam.origin), f"t{i}", tuple(pt)))
    others = [ViewTrajectory.hold(c.clamp(VisionState(float(rng.uniform(-1, 1)), -0.3)), n_p) for c in cameras[1:]]
    return Instance(s_v0, srs, WorldBelief(tuple(sces)), robot, cameras, params, bparams, float(rng.uniform(0, 1)),
                    targets, others)
