"""Safe region: per-direction depth within which no unseen obstacle can be.

Each grid cell of a :class:`~cease.geometry.SphericalGrid` centred on the camera
mount stores how far the space along that direction is guaranteed free of
never-observed obstacles moving at most ``v_max``. Visible cells reset to
``d_max``; hidden cells shrink radially and inherit small depths from nearby
cells.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .belief import BeliefParams, Sce, SceCovariance, SceState
from .collision import RobotTrajectory, point_segment_closest
from .geometry import CameraModel, SphericalGrid, angles_to

RESET = -1
CONTRACTED = -2

DEFAULT_POTENTIAL_RADIUS = 0.15
DEFAULT_SPAWN_CAP = 16
#: boundary points at or below this depth coincide with the origin
COLLAPSED_DEPTH = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SafeRegion:
    """Depth field over a spherical grid.

    ``causes[k]`` records why cell ``k`` took its current depth: :data:`RESET`,
    :data:`CONTRACTED`, or the index of the neighbour it was expanded from.
    """

    grid: SphericalGrid
    depth: np.ndarray
    origin: np.ndarray
    d_max: float
    v_max: float
    causes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "depth", _frozen(np.asarray(self.depth, dtype=float)))
        object.__setattr__(self, "origin", _frozen(np.asarray(self.origin, dtype=float).reshape(3)))
        object.__setattr__(self, "causes", _frozen(np.asarray(self.causes, dtype=np.intp)))
        if self.depth.shape != (self.grid.n_cells,) or self.causes.shape != (self.grid.n_cells,):
            raise ValueError("depth and causes must have one entry per grid cell")
        if np.any(self.depth < 0.0) or np.any(self.depth > self.d_max):
            raise ValueError("depth must stay within [0, d_max]")

    def clone(self) -> "SafeRegion":
        return replace(self, depth=self.depth.copy(), causes=self.causes.copy())

    def boundary_points(self) -> np.ndarray:
        return self.origin + self.depth[:, None] * self.grid.units

    def to_csv_rows(self):
        for k, d in enumerate(self.depth):
            i, j = self.grid.indices(k)
            yield i, j, float(d)


def init_safe_region(grid: SphericalGrid, origin, d_max: float, v_max: float) -> SafeRegion:
    if d_max <= 0 or v_max <= 0:
        raise ValueError("d_max and v_max must be positive")
    n = grid.n_cells
    return SafeRegion(grid, np.full(n, float(d_max)), origin, float(d_max), float(v_max), np.full(n, RESET))


def contract(sr: SafeRegion, dt: float) -> np.ndarray:
    """Candidate depths if hidden obstacles run straight at the origin."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    return np.maximum(0.0, sr.depth - sr.v_max * dt)


def expand_with_sources(sr: SafeRegion, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Candidate depths from sideways motion, and the cell each came from.

    Cell ``j`` is a neighbour of ``k`` when ``gap(k, j) * depth[j] < v_max * dt``,
    where ``gap`` is the smallest angle between the two cells (zero for touching
    cells). A cell always neighbours itself. Ties go to the lowest index.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    g = sr.grid
    step = sr.v_max * dt
    depth = sr.depth
    n = g.n_cells
    rows = np.arange(n)
    if step <= 0.0:
        return depth.copy(), rows
    zeros = np.flatnonzero(depth == 0.0)
    if zeros.size:
        # a zero-depth cell neighbours every cell and wins every tie by index
        return np.zeros(n), np.full(n, zeros[0])
    idx, gaps = g.near
    dj = depth[idx]
    cand = np.where(gaps * dj < step, dj, np.inf)
    col = np.argmin(cand, axis=1)
    best, src = cand[rows, col], idx[rows, col]
    # beyond the near table a cell qualifies only with depth < step / cutoff
    far = np.flatnonzero(depth * g.near_cutoff < step)
    if far.size:
        ok = g.gaps[:, far] * depth[far][None, :] < step
        fc = np.where(ok, depth[far][None, :], np.inf)
        c = np.argmin(fc, axis=1)
        fb, fs = fc[rows, c], far[c]
        better = (fb < best) | ((fb == best) & (fs < src))
        best = np.where(better, fb, best)
        src = np.where(better, fs, src)
    return best, src


def expand(sr: SafeRegion, dt: float) -> np.ndarray:
    return expand_with_sources(sr, dt)[0]


def evolve(sr: SafeRegion, mask, dt: float) -> SafeRegion:
    """One step: visible cells reset to ``d_max``, hidden ones take min(contract, expand)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != sr.depth.shape:
        raise ValueError("visibility mask must have one flag per cell")
    c = contract(sr, dt)
    e, src = expand_with_sources(sr, dt)
    hidden = np.minimum(c, e)
    depth = np.where(mask, sr.d_max, hidden)
    causes = np.where(mask, RESET, np.where(c <= e, CONTRACTED, src))
    return SafeRegion(sr.grid, depth, sr.origin, sr.d_max, sr.v_max, causes)


@lru_cache(maxsize=64)
def _probe_rays(grid: SphericalGrid, origin: tuple, d_max: float, cam_origin: tuple, cam_range: float,
                probes: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions from a camera to probe points along every cell ray, and which are in range."""
    units = grid.units
    d = np.array(origin) + np.multiply.outer(np.array(probes) * d_max, units) - np.array(cam_origin)
    dist = np.linalg.norm(d, axis=-1)
    dirs = d / np.maximum(dist, 1e-12)[..., None]
    return dirs, np.all(dist <= cam_range, axis=0)


def visibility_mask(sr: SafeRegion, cameras, axes, probes=(0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
    """Cells of ``sr`` whose whole ray out to ``d_max`` lies inside some camera's view cone.

    A camera mounted at the region's origin sees a cell iff the cell centre is in its
    cone; other cameras are checked at a few probe depths along the ray.
    """
    units = sr.grid.units
    vis = np.zeros(len(units), dtype=bool)
    for cam, axis in zip(cameras, axes):
        axis_u = axis.unit()
        if np.allclose(cam.origin_array, sr.origin) and cam.d_max >= sr.d_max:
            vis |= angles_to(axis_u, units) <= cam.fov_half_angle
            continue
        dirs, in_range = _probe_rays(sr.grid, tuple(sr.origin.tolist()), sr.d_max,
                                     tuple(cam.origin_array.tolist()), cam.d_max, tuple(probes))
        vis |= in_range & np.all(angles_to(axis_u, dirs) <= cam.fov_half_angle, axis=0)
    return vis


def threat_clearance(sr: SafeRegion, segments, cells: np.ndarray | None = None):
    """Distance from boundary points to the arm capsules given as ``(a, b, r)`` segments.

    Returns ``(cells, clearance, nearest)`` where clearance is measured to the capsule
    surface and ``nearest`` is the closest point on a capsule axis.
    """
    a, b, r = segments
    if cells is None:
        cells = np.arange(sr.grid.n_cells)
    pts = sr.origin + sr.depth[cells, None] * sr.grid.units[cells]
    dist, q = point_segment_closest(pts, a, b)
    surf = dist - r[None, :]
    best = np.argmin(surf, axis=1)
    rows = np.arange(len(cells))
    return cells, surf[rows, best], q[rows, best]


class ThreatScan:
    """:func:`threatening_cells` for many regions sharing a grid, an origin and an arm window.

    Clearances of boundary points at full depth and at the origin are computed once;
    a region then only pays for cells at intermediate depth.
    """

    def __init__(self, grid: SphericalGrid, origin, d_max: float, v_max: float, segments, horizon: float,
                 r_h: float = DEFAULT_POTENTIAL_RADIUS):
        self.grid, self.d_max, self.horizon = grid, float(d_max), float(horizon)
        self.origin = np.asarray(origin, dtype=float).reshape(3)
        self.segments = segments
        self.reach = v_max * horizon + r_h
        pts = np.vstack([self.origin + self.d_max * grid.units, self.origin])
        # points farther than reach from a ball holding every capsule cannot threaten
        a, b, r = segments
        ends = np.concatenate([a, b])
        centre = 0.5 * (ends.min(axis=0) + ends.max(axis=0))
        radius = float(np.max(np.linalg.norm(ends - centre, axis=1))) + float(np.max(r))
        close = np.flatnonzero(np.linalg.norm(pts - centre, axis=1) - radius <= self.reach)
        self.clear = np.full(len(pts), np.inf)
        self.near = np.zeros((len(pts), 3))
        if close.size:
            self.clear[close], self.near[close] = self._measure(pts[close])

    def _measure(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a, b, r = self.segments
        dist, q = point_segment_closest(pts, a, b)
        surf = dist - r[None, :]
        best = np.argmin(surf, axis=1)
        rows = np.arange(len(pts))
        return surf[rows, best], q[rows, best]

    def __call__(self, sr: SafeRegion):
        n = self.grid.n_cells
        if self.horizon <= 0:
            return np.empty(0, dtype=np.intp), np.empty(0), np.empty((0, 3))
        depth = sr.depth
        full = depth >= self.d_max
        zero = depth <= COLLAPSED_DEPTH
        # cells at zero depth all sit on the origin, stored last
        src = np.where(full, np.arange(n), n)
        clearance, nearest = self.clear[src], self.near[src]
        mid = np.flatnonzero(~full & ~zero)
        if mid.size:
            pts = self.origin + depth[mid, None] * self.grid.units[mid]
            clearance[mid], nearest[mid] = self._measure(pts)
        cells = np.flatnonzero(clearance <= self.reach)
        return cells, clearance[cells], nearest[cells]


def threatening_cells(sr: SafeRegion, segments, horizon: float, r_h: float = DEFAULT_POTENTIAL_RADIUS):
    """Cells whose boundary point lies within ``v_max * horizon + r_h`` of a capsule surface.

    Returns ``(cells, clearance, nearest)`` in cell order.
    """
    return ThreatScan(sr.grid, sr.origin, sr.d_max, sr.v_max, segments, horizon, r_h)(sr)


def point_keys(pts: np.ndarray) -> list:
    """Hashable identities of boundary points, equal for points that coincide to 1e-9."""
    return list(map(tuple, np.round(pts, 9).tolist()))


def potential_arrays(sr: SafeRegion, segments, horizon: float, r_h: float = DEFAULT_POTENTIAL_RADIUS,
                     cap: int = DEFAULT_SPAWN_CAP, exclude=(), exclude_points=(), threat=None):
    """Cells, positions and velocities of the potential obstacles :func:`spawn_potential` would create.

    ``exclude_points`` holds :func:`point_keys` values of boundary points that
    already spawned an obstacle; they do not spawn again. ``threat`` may carry a
    precomputed :func:`threatening_cells` result for the same arguments.
    """
    empty = (np.empty(0, dtype=np.intp), np.empty((0, 3)), np.empty((0, 3)))
    if horizon <= 0 or cap <= 0:
        return empty
    if threat is None:
        threat = threatening_cells(sr, segments, horizon, r_h)
    cells, clearance, nearest = threat
    if len(exclude) and cells.size:
        keep = ~np.isin(cells, np.fromiter(exclude, dtype=np.intp))
        cells, clearance, nearest = cells[keep], clearance[keep], nearest[keep]
    if cells.size == 0:
        return empty
    pos = sr.origin + sr.depth[cells, None] * sr.grid.units[cells]
    zero = np.flatnonzero(sr.depth[cells] <= COLLAPSED_DEPTH)
    if zero.size > 1:
        # cells collapsed onto the origin describe one hypothesis
        keep = np.ones(cells.size, dtype=bool)
        keep[zero[1:]] = False
        cells, clearance, nearest, pos = cells[keep], clearance[keep], nearest[keep], pos[keep]
    if len(exclude_points):
        keep = np.array([k not in exclude_points for k in point_keys(pos)], dtype=bool)
        cells, clearance, nearest, pos = cells[keep], clearance[keep], nearest[keep], pos[keep]
        if cells.size == 0:
            return empty
    if cells.size > cap:
        keep = np.sort(np.lexsort((cells, clearance))[:cap])
        cells, nearest, pos = cells[keep], nearest[keep], pos[keep]
    d = nearest - pos
    n = np.linalg.norm(d, axis=1)
    vel = np.where((n > 1e-12)[:, None], sr.v_max * d / np.where(n > 1e-12, n, 1.0)[:, None], 0.0)
    return cells, pos, vel


def spawn_potential(sr: SafeRegion, robot_traj: RobotTrajectory | None, horizon: float, params: BeliefParams,
                    t0: float = 0.0, r_h: float = DEFAULT_POTENTIAL_RADIUS, cap: int = DEFAULT_SPAWN_CAP,
                    prior_cov: SceCovariance | None = None, id_prefix: str = "potential",
                    segments=None, exclude=()) -> list[Sce]:
    """Worst-case hidden obstacles on the safe-region boundary that could reach the arm.

    A cell spawns one when its boundary point lies within ``v_max * horizon + r_h``
    of an arm capsule surface sampled over ``[t0, t0 + horizon]`` (or over the
    given ``(a, b, r)`` segments). The obstacle sits on the boundary and heads for
    the nearest capsule axis point at ``v_max``. Cells in ``exclude`` are skipped,
    coincident boundary points spawn once, and at most ``cap`` are kept (smallest
    clearance first). Output is in cell order.
    """
    if horizon <= 0 or cap <= 0:
        return []
    if segments is None:
        segments = robot_traj.segments_between(t0, t0 + horizon)
    cells, pos, vel = potential_arrays(sr, segments, horizon, r_h, cap, exclude)
    prior = prior_cov if prior_cov is not None else potential_prior(params)
    zero = np.zeros(3)
    return [Sce(f"{id_prefix}:{int(k)}", SceState(x, zero, v, zero, 0.0), prior, "potential", (((0.0, 0.0, 0.0), r_h),))
            for k, x, v in zip(cells, pos, vel)]


def potential_prior(params: BeliefParams) -> SceCovariance:
    """Default covariance of a hypothesized obstacle: ten times the sensor's."""
    return params.sensor_cov.scaled(10.0)


def depth_csv(sr: SafeRegion, t: float | None = None) -> str:
    """CSV dump of the depth field (``az_index, el_index, depth_m`` per cell)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["az_index", "el_index", "depth_m"]
    if t is not None:
        header = ["t"] + header
    w.writerow(header)
    for i, j, d in sr.to_csv_rows():
        row = [i, j, f"{d:.6f}"]
        w.writerow([f"{t:.3f}"] + row if t is not None else row)
    return buf.getvalue()
