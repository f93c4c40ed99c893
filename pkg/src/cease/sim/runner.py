"""Closed-loop execution of a camera policy on a scenario, and the coverage metric."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..belief import WorldBelief, evolve_known, fuse_measurement, new_sce
from ..collision import cpe_aggregate, cpe_single
from ..coos import plan_rig
from ..geometry import VisionState, direction_to_vision_state, step_toward
from ..safe_region import evolve, init_safe_region, visibility_mask
from .scenario import PART_NAMES, POLICIES, Scenario
from .world import observe, part_name, step_world


@dataclass(frozen=True, eq=False)
class StepRecord:
    t: float
    positions: np.ndarray
    axes: tuple
    visible: np.ndarray
    u: dict
    cpe: dict
    p_c: float
    plan_first: tuple | None = None


@dataclass(eq=False)
class WorldTrace:
    scenario: str
    policy: str
    seed: int
    dt: float
    part_ids: tuple
    records: list = field(default_factory=list)
    #: wall-clock seconds per replan; informational, never exported
    plan_seconds: list = field(default_factory=list)
    #: optional JSON lines from the planner
    planner_trace: list | None = None
    #: optional (t, camera, SafeRegion) after each step's update
    depth_trace: list | None = None

    def __len__(self) -> int:
        return len(self.records)


def _tcp_axes(scn: Scenario, axes: Sequence[VisionState], t: float) -> tuple:
    ee = scn.robot.end_effector_at(t)
    out = []
    for setup, axis in zip(scn.cameras, axes):
        cam = setup.model
        try:
            target = cam.clamp(direction_to_vision_state(ee, cam.origin_array))
        except ValueError:
            target = axis
        out.append(cam.clamp(step_toward(axis, target, cam.max_slew_rate * scn.dt)))
    return tuple(out)


def _update_belief(scn: Scenario, belief: WorldBelief, obs, world, first: bool) -> WorldBelief:
    seen = obs.any_valid
    flags = {pid: bool(seen[i]) for i, pid in enumerate(world.ids)}
    if not first:
        belief = evolve_known(belief, {s.id: flags.get(s.id, False) for s in belief.sces}, scn.dt, scn.belief)
    known = set(belief.ids())
    for i, pid in enumerate(world.ids):
        if not seen[i]:
            continue
        cam = int(np.argmax(obs.valid[:, i]))
        meas = obs.measurements[cam][i]
        if pid in known:
            belief = belief.with_sce(fuse_measurement(belief.get(pid), meas, scn.belief))
        else:
            belief = belief.with_sce(new_sce(pid, meas, scn.belief, (((0.0, 0.0, 0.0), float(world.radii[i])),)))
    return WorldBelief(belief.sces, world.t)


def run_policy(scn: Scenario, policy: str, planner_trace: bool = False) -> WorldTrace:
    """Simulate ``scn`` under one camera policy (``fixed``, ``tcp`` or ``cease``).

    Each step: observe with the current axes, update the belief and safe regions,
    record the collision estimate, then pick the axes for the next step. The
    cease policy replans every step and executes only the start of its plan.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    cams = [c.model for c in scn.cameras]
    if policy == "fixed":
        axes = tuple(c.fixed_axis for c in scn.cameras)
    else:
        axes = tuple(c.initial_axis for c in scn.cameras)
    trace = WorldTrace(scn.name, policy, scn.seed, scn.dt, tuple(scn.part_ids),
                       planner_trace=[] if planner_trace else None, depth_trace=[] if planner_trace else None)
    belief = WorldBelief()
    srs = [init_safe_region(scn.grid, cam.origin, cam.d_max, scn.v_max) for cam in cams]
    a_max = scn.belief.a_max
    for k in range(scn.n_steps):
        t = scn.time(k)
        world = step_world(scn, t)
        obs = observe(scn, t, axes, world)
        belief = _update_belief(scn, belief, obs, world, k == 0)
        dt_sr = scn.dt if k > 0 else 0.0
        srs = [evolve(sr, visibility_mask(sr, cams, axes), dt_sr) for sr in srs]
        if trace.depth_trace is not None:
            trace.depth_trace.extend((t, c, sr) for c, sr in enumerate(srs))

        seen = {pid: bool(v) for pid, v in zip(world.ids, obs.any_valid)}
        robot_next = scn.robot.config_at(t + scn.dt)
        cpe = {s.id: cpe_single(s, seen.get(s.id, False), robot_next, scn.dt, a_max) for s in belief.sces}
        p_c = cpe_aggregate(list(cpe.values()))

        first = None
        if policy == "fixed":
            nxt = axes
        elif policy == "tcp":
            nxt = _tcp_axes(scn, axes, t)
        else:
            tic = time.perf_counter()
            plans = plan_rig(axes, srs, belief, scn.robot, cams, scn.planner, scn.belief, t0=t,
                             trace=trace.planner_trace)
            trace.plan_seconds.append(time.perf_counter() - tic)
            first = tuple(p.states[0] for p in plans)
            nxt = tuple(cam.clamp(step_toward(a, goal, cam.max_slew_rate * scn.dt))
                        for cam, a, goal in zip(cams, axes, first))
        trace.records.append(StepRecord(t, world.positions, axes, obs.valid, {s.id: s.u for s in belief.sces},
                                        cpe, p_c, first))
        axes = nxt
    return trace


def temporal_coverage(trace: WorldTrace) -> dict:
    """Fraction of steps each body part is seen by at least one camera, plus their mean ``Avg``.

    With several humanoids a part's ratio pools the steps of all of them.
    """
    if len(trace) == 0:
        raise ValueError("coverage needs a nonempty trace")
    seen = np.array([r.visible.any(axis=0) for r in trace.records])
    names = [part_name(pid) for pid in trace.part_ids]
    out = {}
    for n in PART_NAMES:
        cols = [i for i, m in enumerate(names) if m == n]
        out[n] = float(seen[:, cols].mean()) if cols else 0.0
    out["Avg"] = float(np.mean([out[n] for n in PART_NAMES]))
    return out


def coverage_csv(cov: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["part", "ratio"])
    for n in PART_NAMES + ("Avg",):
        w.writerow([n, f"{cov[n]:.3f}"])
    return buf.getvalue()


def cpe_csv(trace: WorldTrace) -> str:
    ids = sorted({i for r in trace.records for i in r.cpe})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "p_c"] + ids)
    for r in trace.records:
        w.writerow([f"{r.t:.3f}", f"{r.p_c:.6f}"] + [f"{r.cpe[i]:.6f}" if i in r.cpe else "" for i in ids])
    return buf.getvalue()


def depth_trace_csv(trace: WorldTrace) -> str:
    """Safe-region depth per step, camera and cell (empty when depths were not recorded)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "camera", "az_index", "el_index", "depth_m"])
    for t, c, sr in trace.depth_trace or ():
        for i, j, d in sr.to_csv_rows():
            w.writerow([f"{t:.3f}", c, i, j, f"{d:.6f}"])
    return buf.getvalue()


def axes_csv(trace: WorldTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "camera", "az", "el"])
    for r in trace.records:
        for c, a in enumerate(r.axes):
            w.writerow([f"{r.t:.3f}", c, f"{a.azimuth:.6f}", f"{a.elevation:.6f}"])
    return buf.getvalue()
