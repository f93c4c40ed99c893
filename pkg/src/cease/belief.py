"""Obstacle beliefs (state confidence envelopes) and their evolution under observation.

An :class:`Sce` carries a 13-dim kinematic state (position, rotation vector,
velocity, angular velocity, certainty ``u``) plus four 3x3 covariance blocks.
Unobserved SCEs drift at constant velocity while their position and velocity
covariances grow; observed SCEs are replaced by the fresh measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.special import erf

from .geometry import rodrigues_rotate

N_DIRECTIONS = 4096
_PSD_TOL = 1e-9


def _fibonacci_directions(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


# squared components are all that enter the quadratic form in the eigenbasis
_DIR_SQ = _fibonacci_directions(N_DIRECTIONS) ** 2


def _chi3_cdf(s: np.ndarray) -> np.ndarray:
    """P(|Z| < s) for a standard 3-D Gaussian Z."""
    return erf(s / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * s * np.exp(-0.5 * s * s)


def check_psd(cov: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Return the eigenvalues of a symmetric PSD matrix, raising if it is not one."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (3, 3) or not np.all(np.isfinite(cov)):
        raise ValueError(f"{name} must be a finite 3x3 matrix")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > _PSD_TOL * scale:
        raise ValueError(f"{name} is not symmetric")
    lam = np.linalg.eigvalsh(0.5 * (cov + cov.T))
    if lam[0] < -_PSD_TOL * scale:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
    return np.clip(lam, 0.0, None)


@lru_cache(maxsize=65536)
def _ball_mass(lam: tuple[float, float, float], radius: float) -> float:
    q = _DIR_SQ @ np.asarray(lam)
    flat = q <= 0.0
    vals = np.where(flat, 1.0, _chi3_cdf(radius / np.sqrt(np.where(flat, 1.0, q))))
    return float(np.clip(vals.mean(), 0.0, 1.0))


def neighborhood_probability(cov, radius: float) -> float:
    """P(|X| < radius) for X ~ N(0, cov).

    Splits X into a chi(3) radius and a uniform direction; the radial part has a
    closed form, the directional average uses a fixed Fibonacci point set in the
    covariance's principal-axis frame.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    lam = check_psd(cov)
    if lam[-1] <= 1e-24:
        return 1.0
    return _ball_mass(tuple(float(x) for x in lam), float(radius))


def wrap_rotvec(o: np.ndarray) -> np.ndarray:
    """Rewrite a rotation vector so its angle lies in [0, pi]."""
    n = float(np.linalg.norm(o))
    if n <= math.pi:
        return o
    theta = n % (2.0 * math.pi)
    axis = o / n
    if theta > math.pi:
        return axis * (theta - 2.0 * math.pi)
    return axis * theta


def _vec(a) -> np.ndarray:
    v = np.array(a, dtype=float).reshape(3)
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class SceState:
    position: np.ndarray
    rotvec: np.ndarray
    velocity: np.ndarray
    angvel: np.ndarray
    u: float = 0.0

    def __post_init__(self):
        for name in ("position", "rotvec", "velocity", "angvel"):
            v = _vec(getattr(self, name))
            if not np.all(np.isfinite(v)):
                raise ValueError(f"non-finite {name}")
            object.__setattr__(self, name, v)
        if not (0.0 <= self.u <= 1.0):
            raise ValueError(f"certainty u={self.u} outside [0, 1]")
        object.__setattr__(self, "u", float(self.u))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.rotvec, self.velocity, self.angvel, [self.u]])


def _mat(a) -> np.ndarray:
    m = np.array(a, dtype=float).reshape(3, 3)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class SceCovariance:
    """Position, orientation, velocity and angular-velocity covariance blocks."""

    pos: np.ndarray
    rot: np.ndarray
    vel: np.ndarray
    angvel: np.ndarray

    def __post_init__(self):
        for name in ("pos", "rot", "vel", "angvel"):
            object.__setattr__(self, name, _mat(getattr(self, name)))

    @classmethod
    def isotropic(cls, sd_pos: float, sd_rot: float, sd_vel: float, sd_angvel: float) -> "SceCovariance":
        eye = np.eye(3)
        return cls(sd_pos**2 * eye, sd_rot**2 * eye, sd_vel**2 * eye, sd_angvel**2 * eye)

    @classmethod
    def zeros(cls) -> "SceCovariance":
        z = np.zeros((3, 3))
        return cls(z, z, z, z)

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.pos, self.rot, self.vel, self.angvel)

    def scaled(self, k: float) -> "SceCovariance":
        return SceCovariance(*(k * b for b in self.blocks()))

    def validate(self) -> None:
        for name, b in zip(("pos", "rot", "vel", "angvel"), self.blocks()):
            check_psd(b, name)

    def key(self) -> bytes:
        return b"".join(b.tobytes() for b in self.blocks())


@dataclass(frozen=True, eq=False)
class Sce:
    """One obstacle belief; ``spheres`` is a tuple of ((dx, dy, dz), radius) in the body frame."""

    id: str
    state: SceState
    cov: SceCovariance
    kind: str = "known"
    spheres: tuple = (((0.0, 0.0, 0.0), 0.1),)

    def __post_init__(self):
        if self.kind not in ("known", "potential"):
            raise ValueError(f"unknown SCE kind {self.kind!r}")
        if len(self.spheres) == 0:
            raise ValueError("an SCE needs at least one sphere")
        spheres = tuple((tuple(float(c) for c in off), float(r)) for off, r in self.spheres)
        if any(r <= 0 for _, r in spheres):
            raise ValueError("sphere radii must be positive")
        object.__setattr__(self, "spheres", spheres)

    @property
    def u(self) -> float:
        return self.state.u


@dataclass(frozen=True)
class WorldBelief:
    sces: tuple = ()
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sces", tuple(self.sces))
        ids = [s.id for s in self.sces]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate SCE ids in belief")

    def ids(self) -> list[str]:
        return [s.id for s in self.sces]

    def get(self, sce_id: str) -> Sce:
        for s in self.sces:
            if s.id == sce_id:
                return s
        raise KeyError(sce_id)

    def clone(self) -> "WorldBelief":
        # every field is immutable, so a shallow copy is already independent
        return WorldBelief(tuple(self.sces), self.timestamp)

    def with_sce(self, sce: Sce) -> "WorldBelief":
        """Insert or replace one SCE, keeping list order."""
        out, placed = [], False
        for s in self.sces:
            if s.id == sce.id:
                out.append(sce)
                placed = True
            else:
                out.append(s)
        if not placed:
            out.append(sce)
        return WorldBelief(tuple(out), self.timestamp)


def _default_sensor_cov() -> SceCovariance:
    return SceCovariance.isotropic(0.02, 0.05, 0.05, 0.1)


@dataclass(frozen=True)
class BeliefParams:
    r_p: float = 0.10
    r_o: float = 0.20
    a_max: float = 2.0
    sensor_cov: SceCovariance = field(default_factory=_default_sensor_cov)

    def __post_init__(self):
        if min(self.r_p, self.r_o, self.a_max) <= 0:
            raise ValueError("r_p, r_o and a_max must be positive")

    @property
    def accel(self) -> np.ndarray:
        return self.a_max * np.ones(3)


def predict_state(s: SceState, dt: float) -> SceState:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    w = float(np.linalg.norm(s.angvel))
    if w < 1e-9:
        o = s.rotvec
    else:
        o = wrap_rotvec(rodrigues_rotate(s.rotvec, s.angvel / w, w * dt))
    return SceState(s.position + dt * s.velocity, o, s.velocity, s.angvel, s.u)


def predict_covariance(c: SceCovariance, observed: bool, dt: float, params: BeliefParams) -> SceCovariance:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if observed:
        return c
    a = params.accel
    vel = c.vel + dt * dt * np.outer(a, a)
    pos = c.pos + dt * dt * c.vel
    return SceCovariance(pos, c.rot, vel, c.angvel)


def certainty_valid(meas_cov: SceCovariance, params: BeliefParams) -> float:
    return neighborhood_probability(meas_cov.pos, params.r_p) * neighborhood_probability(meas_cov.rot, params.r_o)


def certainty_invalid(s: Sce, dt: float, params: BeliefParams) -> float:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    c = s.cov
    p_pos = neighborhood_probability(c.pos + dt * dt * c.vel, params.r_p)
    p_rot = neighborhood_probability(dt * dt * c.angvel, params.r_o)
    return p_pos * p_rot


def evolve_sce(s: Sce, observed: bool, dt: float, params: BeliefParams) -> Sce:
    if observed:
        u = certainty_valid(params.sensor_cov, params)
    else:
        u = certainty_invalid(s, dt, params)
    state = replace(predict_state(s.state, dt), u=u)
    return replace(s, state=state, cov=predict_covariance(s.cov, observed, dt, params))


def evolve_known(belief: WorldBelief, obs: Mapping[str, bool], dt: float, params: BeliefParams) -> WorldBelief:
    """Advance every SCE one interval given its observation outcome."""
    missing = [s.id for s in belief.sces if s.id not in obs]
    if missing:
        raise KeyError(f"no observation flag for SCE ids {missing}")
    sces = tuple(evolve_sce(s, bool(obs[s.id]), dt, params) for s in belief.sces)
    return WorldBelief(sces, belief.timestamp + dt)


def fuse_measurement(s: Sce, meas: SceState, params: BeliefParams) -> Sce:
    """Replace the belief with a fresh measurement at the sensor's covariance."""
    u = certainty_valid(params.sensor_cov, params)
    state = SceState(meas.position, wrap_rotvec(np.array(meas.rotvec)), meas.velocity, meas.angvel, u)
    return replace(s, state=state, cov=params.sensor_cov)


def new_sce(sce_id: str, meas: SceState, params: BeliefParams, spheres: Sequence = (((0.0, 0.0, 0.0), 0.1),)) -> Sce:
    """Create a known SCE from its first measurement."""
    seed = Sce(sce_id, meas, params.sensor_cov, "known", tuple(spheres))
    return fuse_measurement(seed, meas, params)
