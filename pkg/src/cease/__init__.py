"""Active camera scheduling for robot-arm collision risk.

Obstacle beliefs with certainty, a safe region for unseen space, collision
probability estimates and a receding-horizon view planner, plus a small
deterministic simulator to compare camera policies.
"""

from .belief import (BeliefParams, Sce, SceCovariance, SceState, WorldBelief, certainty_invalid,
                     certainty_valid, evolve_known, evolve_sce, fuse_measurement, neighborhood_probability,
                     new_sce, predict_covariance, predict_state)
from .collision import (RobotConfig, RobotTrajectory, collides, cpe_aggregate, cpe_single, inflate_velocity)
from .coos import (ActionTarget, PlannerParams, ViewTrajectory, coos_search, evaluate_trajectory, gen_states,
                   gen_trajs, plan_rig, transition_prob)
from .geometry import (CameraModel, SphericalGrid, VisionState, angular_distance, direction_to_vision_state,
                       in_fov, rodrigues_rotate, step_toward)
from .safe_region import (SafeRegion, contract, evolve, expand, init_safe_region, spawn_potential,
                          visibility_mask)

__version__ = "0.1.0"

__all__ = [
    "ActionTarget", "BeliefParams", "CameraModel", "PlannerParams", "RobotConfig", "RobotTrajectory",
    "SafeRegion", "Sce", "SceCovariance", "SceState", "SphericalGrid", "ViewTrajectory", "VisionState",
    "WorldBelief", "angular_distance", "certainty_invalid", "certainty_valid", "collides", "contract",
    "coos_search", "cpe_aggregate", "cpe_single", "direction_to_vision_state", "evaluate_trajectory", "evolve",
    "evolve_known", "evolve_sce", "expand", "fuse_measurement", "gen_states", "gen_trajs", "in_fov",
    "inflate_velocity", "init_safe_region", "neighborhood_probability", "new_sce", "plan_rig",
    "predict_covariance", "predict_state", "rodrigues_rotate", "spawn_potential", "step_toward",
    "transition_prob", "visibility_mask", "__version__",
]
