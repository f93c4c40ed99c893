"""Scenario description: robot arm script, humanoid scripts, camera rig and planner settings.

Scenarios are JSON documents with ``schema_version: 1``. Angles in files are in
degrees, everything else in SI units.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from ..belief import BeliefParams, SceCovariance
from ..collision import RobotConfig, RobotTrajectory
from ..coos import PlannerParams
from ..geometry import CameraModel, SphericalGrid, VisionState

PART_NAMES = ("Body", "RA", "RH", "LA", "LH")
POLICIES = ("fixed", "tcp", "cease")
SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """A scenario file that cannot be read or does not match the schema."""


@dataclass(frozen=True)
class Swing:
    """Sinusoidal shoulder angle ``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def angle(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)

    def rate(self, t: float) -> float:
        w = 2.0 * math.pi * self.frequency
        return self.amplitude * w * math.cos(w * t + self.phase)


def _default_parts() -> dict:
    return {
        "Body": ((0.0, 0.0, 0.0), 0.22),
        "RA": ((0.0, -0.22, 0.05), 0.07),
        "RH": ((0.0, -0.22, -0.20), 0.06),
        "LA": ((0.0, 0.22, 0.05), 0.07),
        "LH": ((0.0, 0.22, -0.20), 0.06),
    }


@dataclass(frozen=True)
class HumanoidScript:
    """Five rigid spheres on a body frame that translates along waypoints.

    Offsets are in the body frame (x forward, z up) relative to the base point;
    ``heading`` turns the frame about world z. Each arm (RA, RH or LA, LH) swings
    about its shoulder around ``swing_axis``.
    """

    name: str = "human"
    waypoints: tuple = ((0.0, (1.0, 0.0, 0.0)),)
    heading: float = math.pi
    parts: dict = field(default_factory=_default_parts)
    shoulders: dict = field(default_factory=lambda: {"R": (0.0, -0.22, 0.25), "L": (0.0, 0.22, 0.25)})
    swing: dict = field(default_factory=lambda: {"R": Swing(), "L": Swing()})
    swing_axis: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if set(self.parts) != set(PART_NAMES):
            raise ScenarioError(f"humanoid {self.name!r} needs exactly the parts {PART_NAMES}")
        if any(r <= 0 for _, r in self.parts.values()):
            raise ScenarioError(f"humanoid {self.name!r} has a non-positive part radius")
        times = [w[0] for w in self.waypoints]
        if not times or any(b <= a for a, b in zip(times, times[1:])):
            raise ScenarioError(f"humanoid {self.name!r} waypoint times must increase")
        ax = np.asarray(self.swing_axis, dtype=float)
        if abs(np.linalg.norm(ax) - 1.0) > 1e-6:
            raise ScenarioError(f"humanoid {self.name!r} swing_axis must be a unit vector")

    def base(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Base position and velocity (right derivative at waypoints, zero past the ends)."""
        ts = [w[0] for w in self.waypoints]
        ps = [np.asarray(w[1], dtype=float) for w in self.waypoints]
        if t <= ts[0] or len(ts) == 1:
            if len(ts) > 1 and t == ts[0]:
                return ps[0], (ps[1] - ps[0]) / (ts[1] - ts[0])
            return ps[0], np.zeros(3)
        if t >= ts[-1]:
            return ps[-1], np.zeros(3)
        i = int(np.searchsorted(ts, t, side="right")) - 1
        v = (ps[i + 1] - ps[i]) / (ts[i + 1] - ts[i])
        return ps[i] + (t - ts[i]) * v, v

    def _frame(self) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def poses(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """World positions and velocities of the five parts, in :data:`PART_NAMES` order."""
        R = self._frame()
        p0, v0 = self.base(t)
        axis = np.asarray(self.swing_axis, dtype=float)
        pos, vel = [], []
        for name in PART_NAMES:
            off = np.asarray(self.parts[name][0], dtype=float)
            side = name[0] if name != "Body" else None
            if side is None:
                rel, rel_v = off, np.zeros(3)
            else:
                sh = np.asarray(self.shoulders[side], dtype=float)
                sw = self.swing[side]
                th, om = sw.angle(t), sw.rate(t)
                arm = off - sh
                c, s = math.cos(th), math.sin(th)
                rot = c * arm + (1.0 - c) * float(arm @ axis) * axis + s * np.cross(axis, arm)
                rel = sh + rot
                rel_v = om * np.cross(axis, rot)
            pos.append(p0 + R @ rel)
            vel.append(v0 + R @ rel_v)
        return np.array(pos), np.array(vel)

    def radii(self) -> np.ndarray:
        return np.array([self.parts[n][1] for n in PART_NAMES])


@dataclass(frozen=True)
class CameraSetup:
    model: CameraModel
    initial_axis: VisionState
    fixed_axis: VisionState


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: float
    dt: float
    seed: int
    cameras: tuple
    robot: RobotTrajectory
    humanoids: tuple
    v_max: float = 1.5
    grid: SphericalGrid = SphericalGrid(32, 16)
    belief: BeliefParams = field(default_factory=BeliefParams)
    planner: PlannerParams = field(default_factory=PlannerParams)
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.dt <= 0 or self.duration < self.dt:
            raise ScenarioError("need dt > 0 and duration >= dt")
        if not 1 <= len(self.cameras) <= 2:
            raise ScenarioError("the rig holds one or two cameras")
        if self.v_max <= 0:
            raise ScenarioError("v_max must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def time(self, k: int) -> float:
        return k * self.dt

    @property
    def part_ids(self) -> list[str]:
        return [f"{h.name}:{p}" for h in self.humanoids for p in PART_NAMES]

    def with_seed(self, seed: int) -> "Scenario":
        raw = dict(self.raw, seed=int(seed)) if self.raw else self.raw
        return replace(self, seed=int(seed), raw=raw)


_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_angle2 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_pos = {"type": "number", "exclusiveMinimum": 0}
_swing = {"type": "object", "additionalProperties": False,
          "properties": {"amplitude_deg": {"type": "number"}, "frequency_hz": {"type": "number", "minimum": 0},
                         "phase_deg": {"type": "number"}}}
_part = {"type": "object", "required": ["offset", "radius"], "additionalProperties": False,
         "properties": {"offset": _vec3, "radius": _pos}}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "duration", "dt", "seed", "cameras", "robot", "humanoids"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "duration": _pos,
        "dt": _pos,
        "seed": {"type": "integer", "minimum": 0},
        "cameras": {"type": "array", "minItems": 1, "maxItems": 2, "items": {
            "type": "object", "required": ["origin", "fixed_axis_deg"], "additionalProperties": False,
            "properties": {
                "origin": _vec3, "fov_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 180},
                "d_max": _pos, "max_slew_rate_deg": _pos, "el_limits_deg": _angle2,
                "initial_axis_deg": _angle2, "fixed_axis_deg": _angle2}}},
        "robot": {"type": "object", "required": ["dt", "radii", "samples"], "additionalProperties": False,
                  "properties": {
                      "dt": _pos, "loop": {"type": "boolean"},
                      "radii": {"type": "array", "minItems": 1, "items": _pos},
                      "samples": {"type": "array", "minItems": 1, "items": {
                          "type": "array", "minItems": 1, "items": {
                              "type": "array", "minItems": 2, "maxItems": 2, "items": _vec3}}}}},
        "humanoids": {"type": "array", "items": {
            "type": "object", "required": ["name", "waypoints"], "additionalProperties": False,
            "properties": {
                "name": {"type": "string", "minLength": 1, "pattern": "^[^:]+$"},
                "waypoints": {"type": "array", "minItems": 1, "items": {
                    "type": "object", "required": ["t", "position"], "additionalProperties": False,
                    "properties": {"t": {"type": "number"}, "position": _vec3}}},
                "heading_deg": {"type": "number"},
                "parts": {"type": "object", "additionalProperties": False,
                          "properties": {n: _part for n in PART_NAMES}},
                "shoulders": {"type": "object", "additionalProperties": False,
                              "properties": {"R": _vec3, "L": _vec3}},
                "swing": {"type": "object", "additionalProperties": False,
                          "properties": {"R": _swing, "L": _swing}},
                "swing_axis": _vec3}}},
        "priors": {"type": "object", "additionalProperties": False,
                   "properties": {"v_max": _pos, "a_max": _pos}},
        "grid": {"type": "object", "additionalProperties": False,
                 "properties": {"n_az": {"type": "integer", "minimum": 1}, "n_el": {"type": "integer", "minimum": 1}}},
        "belief": {"type": "object", "additionalProperties": False,
                   "properties": {"r_p": _pos, "r_o": _pos, "sensor_sd": {
                       "type": "object", "additionalProperties": False,
                       "properties": {"position": {"type": "number", "minimum": 0},
                                      "rotation": {"type": "number", "minimum": 0},
                                      "velocity": {"type": "number", "minimum": 0},
                                      "angular_velocity": {"type": "number", "minimum": 0}}}}},
        "planner": {"type": "object", "additionalProperties": False,
                    "properties": {"t_p": _pos, "n_p": {"type": "integer", "minimum": 1},
                                   "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                   "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                   "sigma_t": _pos, "max_trajectories": {"type": "integer", "minimum": 1},
                                   "k_safe": {"type": "integer", "minimum": 0}, "r_h": _pos,
                                   "spawn_cap": {"type": "integer", "minimum": 0}}},
    },
}


def _path(err: jsonschema.ValidationError) -> str:
    out = ""
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _state_deg(pair) -> VisionState:
    return VisionState(math.radians(pair[0]), math.radians(pair[1]))


def _swing_from(d: dict) -> Swing:
    return Swing(math.radians(d.get("amplitude_deg", 0.0)), d.get("frequency_hz", 0.0),
                 math.radians(d.get("phase_deg", 0.0)))


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed scenario document and build the :class:`Scenario`."""
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ScenarioError(f"field {_path(e)}: {e.message}")
    try:
        return _build(doc)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def materialize(doc: dict) -> dict:
    """Copy of a valid scenario document with every optional field set to the value used."""
    out = json.loads(json.dumps(doc))
    out.setdefault("name", "scenario")
    out.setdefault("description", "")
    out["priors"] = {"v_max": 1.5, "a_max": 2.0, **doc.get("priors", {})}
    out["grid"] = {"n_az": 32, "n_el": 16, **doc.get("grid", {})}
    b = doc.get("belief", {})
    out["belief"] = {"r_p": 0.10, "r_o": 0.20,
                     "sensor_sd": {"position": 0.02, "rotation": 0.05, "velocity": 0.05, "angular_velocity": 0.1,
                                   **b.get("sensor_sd", {})},
                     **{k: v for k, v in b.items() if k != "sensor_sd"}}
    out["planner"] = {**asdict(PlannerParams()), **doc.get("planner", {})}
    for c in out["cameras"]:
        c.setdefault("fov_deg", 72.0)
        c.setdefault("d_max", 3.0)
        c.setdefault("max_slew_rate_deg", 180.0)
        c.setdefault("el_limits_deg", [-90.0, 90.0])
        c.setdefault("initial_axis_deg", list(c["fixed_axis_deg"]))
    out["robot"].setdefault("loop", False)
    for h in out["humanoids"]:
        h.setdefault("heading_deg", 180.0)
        parts = {n: {"offset": list(off), "radius": r} for n, (off, r) in _default_parts().items()}
        parts.update(h.get("parts", {}))
        h["parts"] = parts
        h["shoulders"] = {"R": [0.0, -0.22, 0.25], "L": [0.0, 0.22, 0.25], **h.get("shoulders", {})}
        swing = {}
        for side in ("R", "L"):
            swing[side] = {"amplitude_deg": 0.0, "frequency_hz": 0.0, "phase_deg": 0.0,
                           **h.get("swing", {}).get(side, {})}
        h["swing"] = swing
        h.setdefault("swing_axis", [0.0, 1.0, 0.0])
    return out


def _build(doc: dict) -> Scenario:
    raw = doc
    doc = materialize(doc)
    v_max = float(doc["priors"]["v_max"])
    bdoc = doc["belief"]
    sd = bdoc["sensor_sd"]
    sensor = SceCovariance.isotropic(sd["position"], sd["rotation"], sd["velocity"], sd["angular_velocity"])
    belief = BeliefParams(bdoc["r_p"], bdoc["r_o"], doc["priors"]["a_max"], sensor)
    planner = PlannerParams(**doc["planner"])
    grid = SphericalGrid(doc["grid"]["n_az"], doc["grid"]["n_el"])

    cams = []
    for i, c in enumerate(doc["cameras"]):
        lim = c["el_limits_deg"]
        try:
            model = CameraModel(tuple(c["origin"]), math.radians(c["fov_deg"]) / 2.0, c["d_max"],
                                math.radians(c["max_slew_rate_deg"]), math.radians(lim[0]), math.radians(lim[1]))
        except ValueError as exc:
            raise ScenarioError(f"field cameras[{i}]: {exc}") from exc
        cams.append(CameraSetup(model, model.clamp(_state_deg(c["initial_axis_deg"])),
                                model.clamp(_state_deg(c["fixed_axis_deg"]))))

    r = doc["robot"]
    radii = r["radii"]
    samples = []
    for i, s in enumerate(r["samples"]):
        if len(s) != len(radii):
            raise ScenarioError(f"field robot.samples[{i}]: expected {len(radii)} links, got {len(s)}")
        samples.append(RobotConfig([l[0] for l in s], [l[1] for l in s], radii))
    robot = RobotTrajectory(tuple(samples), r["dt"], 0.0, r["loop"])

    humans = []
    names = set()
    for i, h in enumerate(doc["humanoids"]):
        if h["name"] in names:
            raise ScenarioError(f"field humanoids[{i}].name: duplicate name {h['name']!r}")
        names.add(h["name"])
        parts = {n: (tuple(p["offset"]), p["radius"]) for n, p in h["parts"].items()}
        shoulders = {k: tuple(v) for k, v in h["shoulders"].items()}
        swing = {k: _swing_from(v) for k, v in h["swing"].items()}
        wps = tuple((w["t"], tuple(w["position"])) for w in h["waypoints"])
        try:
            humans.append(HumanoidScript(h["name"], wps, math.radians(h["heading_deg"]), parts,
                                         shoulders, swing, tuple(h["swing_axis"])))
        except ScenarioError as exc:
            raise ScenarioError(f"field humanoids[{i}]: {exc}") from exc

    return Scenario(doc["name"], float(doc["duration"]), float(doc["dt"]), int(doc["seed"]),
                    tuple(cams), robot, tuple(humans), v_max, grid, belief, planner, raw=raw)


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file, raising :class:`ScenarioError` with a line or field."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror or exc})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def bundled_path(name: str) -> Path:
    """Path of a scenario shipped with the package (``exp1`` or ``exp2``)."""
    return Path(__file__).resolve().parent.parent / "data" / f"{name}.json"
