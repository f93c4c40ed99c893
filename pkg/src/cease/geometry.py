"""Directional math on the sphere of camera pointing directions.

Convention: azimuth 0 points along world +x, positive azimuth turns toward +y,
and positive elevation tilts toward +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    w = (a + math.pi) % TWO_PI - math.pi
    # float rounding can land exactly on +pi
    return -math.pi if w >= math.pi else w


@dataclass(frozen=True)
class VisionState:
    """A camera pointing direction (azimuth, elevation) in radians."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise ValueError(f"non-finite vision state ({self.azimuth}, {self.elevation})")
        if abs(self.elevation) > math.pi / 2 + 1e-12:
            raise ValueError(f"elevation {self.elevation} outside [-pi/2, pi/2]")
        object.__setattr__(self, "azimuth", wrap_angle(float(self.azimuth)))
        el = min(max(float(self.elevation), -math.pi / 2), math.pi / 2)
        object.__setattr__(self, "elevation", el)
        ce = math.cos(el)
        object.__setattr__(self, "_ut", (ce * math.cos(self.azimuth), ce * math.sin(self.azimuth), math.sin(el)))

    def unit(self) -> np.ndarray:
        return np.array(self._ut)

    def unit_tuple(self) -> tuple[float, float, float]:
        return self._ut

    @classmethod
    def from_unit(cls, u) -> "VisionState":
        x, y, z = (float(c) for c in u)
        n = math.sqrt(x * x + y * y + z * z)
        if n < 1e-12:
            raise ValueError("zero-length direction has no vision state")
        el = math.asin(max(-1.0, min(1.0, z / n)))
        az = math.atan2(y, x) if (abs(x) > 0.0 or abs(y) > 0.0) else 0.0
        return cls(az, el)

    def as_tuple(self) -> tuple[float, float]:
        return (self.azimuth, self.elevation)


def _angle_between_units(u, v) -> float:
    # atan2 form stays accurate near 0 and pi, unlike acos of the dot product
    ux, uy, uz = (float(c) for c in u)
    vx, vy, vz = (float(c) for c in v)
    cx, cy, cz = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), ux * vx + uy * vy + uz * vz)


def angular_distance(a: VisionState, b: VisionState) -> float:
    """Great-circle angle between two pointing directions, in [0, pi]."""
    return _angle_between_units(a.unit_tuple(), b.unit_tuple())


def angles_to(axis_unit: np.ndarray, units: np.ndarray) -> np.ndarray:
    """Vectorized great-circle angle from one unit vector to each row of ``units``."""
    ax, ay, az = (float(c) for c in axis_unit)
    ux, uy, uz = units[..., 0], units[..., 1], units[..., 2]
    dots = ux * ax + uy * ay + uz * az
    cx, cy, cz = uy * az - uz * ay, uz * ax - ux * az, ux * ay - uy * ax
    return np.arctan2(np.sqrt(cx * cx + cy * cy + cz * cz), dots)


def rodrigues_rotate(o, axis, theta: float) -> np.ndarray:
    """Rotate vector ``o`` by ``theta`` radians about the unit vector ``axis``."""
    o = np.asarray(o, dtype=float)
    r = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(r) - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be a unit vector, got norm {np.linalg.norm(r)}")
    c, s = math.cos(theta), math.sin(theta)
    return c * o + (1.0 - c) * float(np.dot(o, r)) * r + s * np.cross(r, o)


def direction_to_vision_state(point, origin) -> VisionState:
    d = np.asarray(point, dtype=float) - np.asarray(origin, dtype=float)
    if np.linalg.norm(d) < 1e-12:
        raise ValueError("point coincides with origin; direction undefined")
    return VisionState.from_unit(d)


def step_toward(current: VisionState, target: VisionState, max_angle: float) -> VisionState:
    """Move ``current`` toward ``target`` along the great circle by at most ``max_angle``."""
    ang = angular_distance(current, target)
    if ang <= max_angle:
        return target
    ux, uy, uz = current.unit_tuple()
    vx, vy, vz = target.unit_tuple()
    ax, ay, az = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n < 1e-12:
        # antipodal: any perpendicular works, pick one deterministically
        hx, hy, hz = (0.0, 0.0, 1.0) if abs(uz) < 0.9 else (1.0, 0.0, 0.0)
        ax, ay, az = uy * hz - uz * hy, uz * hx - ux * hz, ux * hy - uy * hx
        n = math.sqrt(ax * ax + ay * ay + az * az)
    ax, ay, az = ax / n, ay / n, az / n
    # the axis is perpendicular to u, so the rotation is cos * u + sin * (axis x u)
    c, s = math.cos(max_angle), math.sin(max_angle)
    px, py, pz = ay * uz - az * uy, az * ux - ax * uz, ax * uy - ay * ux
    return VisionState.from_unit((c * ux + s * px, c * uy + s * py, c * uz + s * pz))


@dataclass(frozen=True)
class CameraModel:
    """One active camera mount.

    ``el_min``/``el_max`` optionally restrict the tilt servo travel.
    """

    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    fov_half_angle: float = math.radians(36.0)
    d_max: float = 3.0
    max_slew_rate: float = math.pi
    el_min: float = -math.pi / 2
    el_max: float = math.pi / 2

    def __post_init__(self):
        if not (0.0 < self.fov_half_angle < math.pi / 2):
            raise ValueError("fov_half_angle must lie in (0, pi/2)")
        if self.d_max <= 0:
            raise ValueError("d_max must be positive")
        if self.max_slew_rate <= 0:
            raise ValueError("max_slew_rate must be positive")
        if self.el_min > self.el_max:
            raise ValueError("el_min exceeds el_max")
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))

    @property
    def origin_array(self) -> np.ndarray:
        return np.array(self.origin)

    def clamp(self, s: VisionState) -> VisionState:
        el = min(max(s.elevation, self.el_min), self.el_max)
        return s if el == s.elevation else VisionState(s.azimuth, el)


def in_fov(camera: CameraModel, optical_axis: VisionState, point) -> bool:
    d = np.asarray(point, dtype=float) - camera.origin_array
    dist = float(np.linalg.norm(d))
    if dist > camera.d_max:
        return False
    if dist < 1e-12:
        return True
    return _angle_between_units(optical_axis.unit(), d / dist) <= camera.fov_half_angle


def in_fov_many(camera: CameraModel, axis_unit: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`in_fov` over rows of ``points``."""
    d = np.atleast_2d(points) - camera.origin_array
    dist = np.linalg.norm(d, axis=1)
    safe = np.where(dist < 1e-12, 1.0, dist)
    ang = angles_to(axis_unit, d / safe[:, None])
    return (dist <= camera.d_max) & ((ang <= camera.fov_half_angle) | (dist < 1e-12))


@dataclass(frozen=True)
class SphericalGrid:
    """Equirectangular partition of the sphere into ``n_az * n_el`` cells.

    Cell ``k = el_index * n_az + az_index``.
    """

    n_az: int = 32
    n_el: int = 16

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise ValueError("grid needs at least one cell per axis")

    @property
    def n_cells(self) -> int:
        return self.n_az * self.n_el

    @property
    def az_step(self) -> float:
        return TWO_PI / self.n_az

    @property
    def el_step(self) -> float:
        return math.pi / self.n_el

    def index(self, az_index: int, el_index: int) -> int:
        return el_index * self.n_az + (az_index % self.n_az)

    def indices(self, k: int) -> tuple[int, int]:
        return k % self.n_az, k // self.n_az

    @cached_property
    def center_angles(self) -> np.ndarray:
        """(n_cells, 2) array of (azimuth, elevation) cell centers."""
        az = -math.pi + (np.arange(self.n_az) + 0.5) * self.az_step
        el = -math.pi / 2 + (np.arange(self.n_el) + 0.5) * self.el_step
        A, E = np.meshgrid(az, el)
        return np.stack([A.ravel(), E.ravel()], axis=1)

    @cached_property
    def centers(self) -> list[VisionState]:
        return [VisionState(a, e) for a, e in self.center_angles]

    @cached_property
    def units(self) -> np.ndarray:
        a, e = self.center_angles[:, 0], self.center_angles[:, 1]
        units = np.stack([np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)], axis=1)
        units.setflags(write=False)
        return units

    @cached_property
    def angular_radius(self) -> np.ndarray:
        """Per-cell bound on the angle from the center to any point of the cell."""
        out = np.empty(self.n_cells)
        for j in range(self.n_el):
            lo = -math.pi / 2 + j * self.el_step
            hi = lo + self.el_step
            c = VisionState(0.0, lo + 0.5 * self.el_step)
            corners = [VisionState(da, e) for da in (-0.5 * self.az_step, 0.5 * self.az_step) for e in (lo, hi)]
            # edge midpoints matter when a corner sits on a pole
            edges = [VisionState(0.0, lo), VisionState(0.0, hi)]
            r = max(angular_distance(c, p) for p in corners + edges)
            out[j * self.n_az:(j + 1) * self.n_az] = r
        out.setflags(write=False)
        return out

    @cached_property
    def gaps(self) -> np.ndarray:
        """(n_cells, n_cells) lower bound on the angle between any two points of two cells.

        Centre-to-centre angle minus both cells' angular radii, floored at zero;
        touching cells (including all cells around a pole) get zero.
        """
        u = self.units
        cross = np.linalg.norm(np.cross(u[:, None, :], u[None, :, :]), axis=-1)
        ang = np.arctan2(cross, u @ u.T)
        r = self.angular_radius
        gaps = np.maximum(0.0, ang - r[:, None] - r[None, :] - 1e-12)
        gaps.setflags(write=False)
        return gaps

    #: gap below which cells are kept in the per-cell :attr:`near` table
    near_cutoff = 0.2

    @cached_property
    def near(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell table of cells within :attr:`near_cutoff` gap, in index order.

        Returns ``(indices, gaps)``, each (n_cells, w), padded with the cell
        itself at gap zero.
        """
        rows = [np.flatnonzero(self.gaps[k] < self.near_cutoff) for k in range(self.n_cells)]
        width = max(len(r) for r in rows)
        idx = np.array([np.concatenate([r, np.full(width - len(r), k)]) for k, r in enumerate(rows)], dtype=np.intp)
        gaps = np.take_along_axis(self.gaps, idx, axis=1).copy()
        idx.setflags(write=False)
        gaps.setflags(write=False)
        return idx, gaps

    def cell_of(self, direction) -> int:
        """Cell index containing a (not necessarily unit) direction vector."""
        s = VisionState.from_unit(direction)
        return self.cell_of_state(s)

    def cell_of_state(self, s: VisionState) -> int:
        i = int((s.azimuth + math.pi) // self.az_step)
        j = int((s.elevation + math.pi / 2) // self.el_step)
        return self.index(i, min(max(j, 0), self.n_el - 1))

    def cells_of(self, directions: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`cell_of` over rows of ``directions``."""
        d = np.atleast_2d(directions)
        n = np.linalg.norm(d, axis=1)
        az = np.arctan2(d[:, 1], d[:, 0])
        el = np.arcsin(np.clip(d[:, 2] / np.where(n == 0, 1.0, n), -1.0, 1.0))
        i = ((az + math.pi) // self.az_step).astype(np.intp) % self.n_az
        j = np.clip(((el + math.pi / 2) // self.el_step).astype(np.intp), 0, self.n_el - 1)
        return j * self.n_az + i
