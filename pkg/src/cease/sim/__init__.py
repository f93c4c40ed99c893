"""Deterministic desk-scale world for comparing camera policies."""

from .runner import WorldTrace, axes_csv, coverage_csv, cpe_csv, run_policy, temporal_coverage
from .scenario import (PART_NAMES, POLICIES, HumanoidScript, Scenario, ScenarioError, Swing, bundled_path,
                       load_scenario, scenario_from_dict)
from .world import Observation, WorldState, observe, step_world

__all__ = [
    "PART_NAMES", "POLICIES", "HumanoidScript", "Observation", "Scenario", "ScenarioError", "Swing",
    "WorldState", "WorldTrace", "axes_csv", "bundled_path", "coverage_csv", "cpe_csv", "load_scenario",
    "observe", "run_policy", "scenario_from_dict", "step_world", "temporal_coverage",
]
