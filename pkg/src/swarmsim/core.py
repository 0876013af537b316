"""Shared domain types, units, and frame conventions.

The world frame is North-East-Down (NED): x north, y east, z down.
Altitude above ground is therefore -pd.  All angles are radians and all
distances are meters inside the package; degrees appear only at the CLI
boundary.  Every state value is required to be finite -- NaN/Inf are
rejected at construction so they cannot propagate silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any, Optional

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def clamp_norm(vec: np.ndarray, limit: float) -> np.ndarray:
    """Scale ``vec`` down so its euclidean norm does not exceed ``limit``."""
    n = float(np.linalg.norm(vec))
    if n > limit > 0.0:
        return vec * (limit / n)
    return vec


def substream(seed: int, key: int) -> np.random.Generator:
    """Derive an independent RNG stream from (seed, key).

    Fixed keys keep the map and spawn draws independent: regenerating the
    obstacle map never perturbs the spawn positions for the same seed.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


# Substream keys, fixed for the life of the record schema.
RNG_KEY_MAP = 0
RNG_KEY_SPAWN = 1


@dataclass(frozen=True)
class Vec3:
    """A 3-vector in the NED world frame (meters or meters/second)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for c in (self.x, self.y, self.z):
            if not math.isfinite(c):
                raise ValueError(f"Vec3 components must be finite, got {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)


ZERO3 = Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class AgentState:
    """Rigid-body state of one drone.

    pn/pe/pd are the inertial position, u/v/w the body-frame linear
    velocity, phi/theta/psi the roll/pitch/yaw Euler angles, and
    p/q/r_rate the body-frame angular rates.  In point-mass mode the
    attitude is identically zero, so u/v/w coincide with the inertial
    velocity and the remaining fields stay at zero.
    """

    pn: float = 0.0
    pe: float = 0.0
    pd: float = 0.0
    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r_rate: float = 0.0

    def __post_init__(self):
        vec = self.as_vector()
        if not np.all(np.isfinite(vec)):
            raise ValueError("AgentState fields must all be finite")
        if abs(self.phi) > math.pi + 1e-12:
            raise ValueError(f"|phi| must be <= pi, got {self.phi}")
        if abs(self.theta) >= math.pi / 2:
            raise ValueError(f"|theta| must be < pi/2, got {self.theta}")
        if not (-math.pi < self.psi <= math.pi + 1e-12):
            raise ValueError(f"psi must lie in (-pi, pi], got {self.psi}")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.pn, self.pe, self.pd, self.u, self.v, self.w,
             self.phi, self.theta, self.psi, self.p, self.q, self.r_rate],
            dtype=float,
        )

    @staticmethod
    def from_vector(vec) -> "AgentState":
        vec = np.asarray(vec, dtype=float)
        return AgentState(*(float(x) for x in vec[:12]))

    @staticmethod
    def point_mass(position: Vec3, velocity: Vec3 = ZERO3) -> "AgentState":
        """State with zero attitude; u/v/w hold the inertial velocity."""
        return AgentState(pn=position.x, pe=position.y, pd=position.z,
                          u=velocity.x, v=velocity.y, w=velocity.z)

    @property
    def position(self) -> Vec3:
        return Vec3(self.pn, self.pe, self.pd)

    @property
    def velocity_body(self) -> Vec3:
        return Vec3(self.u, self.v, self.w)


@dataclass(frozen=True)
class SpawnVolume:
    """Axis-aligned cube the initial positions are drawn from."""

    center: Vec3 = Vec3(0.0, 0.0, -50.0)
    edge: float = 60.0

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.center.as_array()
        half = self.edge / 2.0
        return c - half, c + half


@dataclass
class SwarmParams:
    """Swarm-level parameters shared by both steering algorithms.

    The per-algorithm gain blocks are attached by the config loader; they
    are defined in :mod:`swarmsim.flocking` and carry their own validation.
    """

    n_agents: int = 25
    algorithm: str = "vasarhelyi"          # olfati_saber | vasarhelyi
    neighbor_mode: str = "topological"     # metric | topological
    radius: float = 150.0                  # metric sensing radius (m)
    nn: int = 10                           # topological neighbor count
    d_ref: float = 25.0                    # desired inter-agent distance (m)
    v_ref: float = 6.0                     # preferred speed (m/s)
    u_mig: Vec3 = Vec3(6.0, 0.0, 0.0)      # migration velocity (m/s, NED)
    r_coll: float = 0.5                    # agent collision radius (m)
    v_max: float = 10.0                    # speed ceiling (m/s)
    a_max: float = 5.0                     # acceleration ceiling (m/s^2)
    migration: bool = True                 # False = pure consensus/alignment
    gains_olfati_saber: Any = None         # flocking.OlfatiSaberGains
    gains_vasarhelyi: Any = None           # flocking.VasarhelyiGains

    def violations(self) -> list[str]:
        out = []
        if self.n_agents < 1:
            out.append("n_agents must be >= 1")
        if self.algorithm not in ("olfati_saber", "vasarhelyi"):
            out.append(f"unknown algorithm {self.algorithm!r}")
        if self.neighbor_mode not in ("metric", "topological"):
            out.append(f"unknown neighbor_mode {self.neighbor_mode!r}")
        if self.neighbor_mode == "metric" and not self.radius > 0:
            out.append("metric sensing radius must be > 0")
        if (self.algorithm == "olfati_saber" and not self.radius > 0
                and getattr(self.gains_olfati_saber, "interaction_range", None) is None):
            # Without an explicit interaction_range the lattice potential is
            # scaled by the sensing radius, even under topological selection.
            out.append("olfati_saber requires radius > 0 for its range scaling")
        if (self.neighbor_mode == "topological" and self.n_agents > 1
                and not (1 <= self.nn <= self.n_agents - 1)):
            out.append("topological count must be between 1 and N-1")
        if not self.d_ref > 2.0 * self.r_coll:
            out.append("d_ref must exceed twice the collision radius")
        if not self.v_ref > 0:
            out.append("v_ref must be > 0")
        if not self.v_max >= self.v_ref:
            out.append("v_max must be >= v_ref")
        if not self.a_max > 0:
            out.append("a_max must be > 0")
        if not self.r_coll > 0:
            out.append("r_coll must be > 0")
        for g in (self.gains_olfati_saber, self.gains_vasarhelyi):
            if g is not None:
                out.extend(g.violations())
        return out


@dataclass
class MapConfig:
    """Procedural obstacle-field parameters (see swarmsim.environment)."""

    enabled: bool = False
    bounds_min: tuple[float, float] = (100.0, -100.0)   # (north, east)
    bounds_max: tuple[float, float] = (300.0, 100.0)
    density: float = 5e-4                               # obstacles per m^2
    radius_range: tuple[float, float] = (5.0, 15.0)
    file: Optional[str] = None                          # overrides generation

    def violations(self) -> list[str]:
        out = []
        if self.density < 0:
            out.append("map density must be >= 0")
        if self.radius_range[0] > self.radius_range[1]:
            out.append("map radius_range must satisfy r_min <= r_max")
        if self.radius_range[0] <= 0:
            out.append("map obstacle radii must be > 0")
        if (self.bounds_max[0] <= self.bounds_min[0]
                or self.bounds_max[1] <= self.bounds_min[1]):
            out.append("map bounds must have positive extent")
        return out


@dataclass
class SimConfig:
    """Run-level configuration: integration, duration, seeding, I/O."""

    dt: float = 0.01
    t_end: float = 100.0
    rng_seed: int = 0
    dynamics_mode: str = "point_mass"      # point_mass | quadcopter
    spawn: SpawnVolume = field(default_factory=SpawnVolume)
    map: MapConfig = field(default_factory=MapConfig)
    out_dir: Optional[str] = None
    metrics_stride: int = 1                # 0 disables metric frames
    state_stride: Optional[int] = None     # None = auto (1 if N<=64 else 10)

    def n_ticks(self) -> int:
        return int(round(self.t_end / self.dt))

    def violations(self, sp: Optional[SwarmParams] = None) -> list[str]:
        out = []
        if not (0.0 < self.dt <= 0.1):
            out.append("dt must satisfy 0 < dt <= 0.1 s")
        if self.t_end < self.dt:
            out.append("t_end must be >= dt")
        if self.dynamics_mode not in ("point_mass", "quadcopter"):
            out.append(f"unknown dynamics_mode {self.dynamics_mode!r}")
        if self.spawn.edge <= 0:
            out.append("spawn cube edge must be > 0")
        if self.metrics_stride < 0:
            out.append("metrics_stride must be >= 0")
        if self.state_stride is not None and self.state_stride < 1:
            out.append("state_stride must be >= 1")
        out.extend(self.map.violations())
        if sp is not None:
            # Grid-packing bound: a cube of edge L holds floor(L/s+1)^3 points
            # at pairwise spacing s; spawning can only succeed below that.
            s = 2.0 * sp.r_coll
            if s > 0:
                capacity = int(self.spawn.edge / s + 1) ** 3
                if sp.n_agents > capacity:
                    out.append(
                        "spawn cube too small to hold "
                        f"{sp.n_agents} agents at separation {s} m"
                    )
        return out


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_config: empty violation list means valid."""

    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_config(cfg: SimConfig, sp: SwarmParams) -> ValidationReport:
    """Collect every violated invariant of a (SimConfig, SwarmParams) pair.

    Pure: never mutates its inputs, and identical inputs yield identical
    reports.
    """
    return ValidationReport(tuple(cfg.violations(sp) + sp.violations()))
