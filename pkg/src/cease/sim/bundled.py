"""Generators for the two bundled scenarios.

``exp1``: a humanoid stands in front of the arm and swings both arms toward it.
``exp2``: the same humanoid walks sideways across the workspace while swinging.

The JSON files under ``cease/data`` are the output of :func:`write_bundled`.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .scenario import SCHEMA_VERSION

ROBOT_DT = 0.05
ROBOT_PERIOD = 4.0
LINK_RADII = (0.06, 0.05, 0.04)


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def arm_samples(period: float = ROBOT_PERIOD, dt: float = ROBOT_DT, yaw_amp_deg: float = 80.0,
                reach: tuple = (0.35, 0.35)) -> list:
    """One period of a 3-link arm sweeping its base yaw while flexing the elbow.

    Each sample is ``[[a, b], ...]`` per link in world coordinates.
    """
    n = int(round(period / dt))
    out = []
    for i in range(n + 1):
        ph = 2.0 * math.pi * i / n
        yaw = math.radians(yaw_amp_deg) * math.sin(ph)
        shoulder = math.radians(20.0) + math.radians(10.0) * math.sin(2.0 * ph)
        elbow = math.radians(-35.0) + math.radians(15.0) * math.cos(ph)
        R = _rot_z(yaw)
        base = np.zeros(3)
        top = np.array([0.0, 0.0, 0.40])
        d1 = np.array([math.cos(shoulder), 0.0, math.sin(shoulder)])
        elb = top + reach[0] * d1
        d2 = np.array([math.cos(shoulder + elbow), 0.0, math.sin(shoulder + elbow)])
        ee = elb + reach[1] * d2
        pts = [R @ p for p in (base, top, elb, ee)]
        out.append([[_r(pts[k]), _r(pts[k + 1])] for k in range(3)])
    return out


def _r(v) -> list:
    return [round(float(c), 6) for c in v]


def _common(name: str, description: str, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "description": description,
        "duration": 20.0,
        "dt": 0.05,
        "seed": seed,
        "cameras": [
            {"origin": [-0.25, 0.55, 0.55], "fov_deg": 72.0, "d_max": 3.0, "max_slew_rate_deg": 180.0,
             "initial_axis_deg": [-45.0, -40.0], "fixed_axis_deg": [-45.0, -40.0]},
            {"origin": [-0.25, -0.55, 0.55], "fov_deg": 72.0, "d_max": 3.0, "max_slew_rate_deg": 180.0,
             "initial_axis_deg": [45.0, -40.0], "fixed_axis_deg": [45.0, -40.0]},
        ],
        "robot": {"dt": ROBOT_DT, "loop": True, "radii": list(LINK_RADII), "samples": arm_samples()},
        "priors": {"v_max": 1.5, "a_max": 2.0},
        "grid": {"n_az": 32, "n_el": 16},
    }


def _humanoid(name: str, waypoints: list, amp: float, freq: float) -> dict:
    return {
        "name": name,
        "waypoints": waypoints,
        "heading_deg": 180.0,
        "swing": {"R": {"amplitude_deg": amp, "frequency_hz": freq, "phase_deg": 0.0},
                  "L": {"amplitude_deg": amp, "frequency_hz": freq, "phase_deg": 180.0}},
    }


def exp1() -> dict:
    doc = _common("exp1", "stationary humanoid swinging both arms toward the arm workspace", 11)
    doc["humanoids"] = [_humanoid("human", [{"t": 0.0, "position": [0.85, 0.0, 0.35]}], 80.0, 0.5)]
    return doc


def exp2() -> dict:
    doc = _common("exp2", "humanoid walking sideways across the workspace while swinging its arms", 12)
    wps = [{"t": 0.0, "position": [0.85, -0.9, 0.35]}, {"t": 5.0, "position": [0.85, 0.9, 0.35]},
           {"t": 10.0, "position": [0.85, -0.9, 0.35]}, {"t": 15.0, "position": [0.85, 0.9, 0.35]},
           {"t": 20.0, "position": [0.85, -0.9, 0.35]}]
    doc["humanoids"] = [_humanoid("human", wps, 80.0, 0.5)]
    return doc


BUNDLED = {"exp1": exp1, "exp2": exp2}


def render(doc: dict) -> str:
    return json.dumps(doc, indent=1) + "\n"


def write_bundled(directory: Path | None = None) -> list[Path]:
    directory = Path(directory) if directory else Path(__file__).resolve().parent.parent / "data"
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, make in BUNDLED.items():
        p = directory / f"{name}.json"
        p.write_text(render(make()), encoding="utf-8")
        out.append(p)
    return out
