"""Cylindrical obstacle fields: procedural generation and geometry queries.

Obstacles are vertical cylinders, unbounded in altitude, described by a
2-D footprint (center north/east, radius).  Maps are immutable after
generation and all queries are pure, so they can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .core import RNG_KEY_MAP, Vec3, substream


class MapGenerationError(RuntimeError):
    """Raised when rejection sampling cannot place all obstacles."""


@dataclass(frozen=True)
class Obstacle:
    """One vertical cylinder: footprint center (north, east) and radius."""

    center_n: float
    center_e: float
    r_obs: float

    def __post_init__(self):
        if not self.r_obs > 0:
            raise ValueError(f"obstacle radius must be > 0, got {self.r_obs}")

    @property
    def center_ne(self) -> np.ndarray:
        return np.array([self.center_n, self.center_e], dtype=float)


@dataclass(frozen=True)
class ObstacleMap:
    """Immutable set of non-overlapping cylinders inside a rectangle.

    ``bounds_min``/``bounds_max`` are (north, east) corners of the field
    the centers were drawn from; obstacles may poke past the bounds by up
    to their radius.
    """

    obstacles: tuple[Obstacle, ...] = ()
    bounds_min: tuple[float, float] = (0.0, 0.0)
    bounds_max: tuple[float, float] = (0.0, 0.0)
    density: float = 0.0
    radius_range: tuple[float, float] = (0.0, 0.0)

    def __len__(self) -> int:
        return len(self.obstacles)

    def centers(self) -> np.ndarray:
        """(M, 2) array of footprint centers; empty map gives shape (0, 2)."""
        if not self.obstacles:
            return np.zeros((0, 2))
        return np.array([[o.center_n, o.center_e] for o in self.obstacles])

    def radii(self) -> np.ndarray:
        if not self.obstacles:
            return np.zeros(0)
        return np.array([o.r_obs for o in self.obstacles])


EMPTY_MAP = ObstacleMap()

# Resampling attempts per obstacle before generation gives up.  Generous:
# failures should mean the density genuinely cannot fit the radius range.
_ATTEMPTS_PER_OBSTACLE = 1000


def generate_map(
    bounds_min: Sequence[float],
    bounds_max: Sequence[float],
    density: float,
    radius_range: Sequence[float],
    seed: int,
) -> ObstacleMap:
    """Draw round(density * area) non-overlapping cylinders.

    Centers are uniform over the bounds rectangle and radii uniform over
    ``radius_range``, both from an RNG substream derived from ``seed``, so
    the same arguments always produce the same map.  A candidate that
    overlaps an already-placed disc is redrawn (center and radius); after
    a fixed attempt budget generation fails rather than returning a map
    that violates the non-overlap invariant.
    """
    lo = np.asarray(bounds_min, dtype=float)
    hi = np.asarray(bounds_max, dtype=float)
    r_min, r_max = float(radius_range[0]), float(radius_range[1])
    if density < 0:
        raise ValueError("density must be >= 0")
    if r_min > r_max or r_min <= 0:
        raise ValueError("radius_range must satisfy 0 < r_min <= r_max")
    if np.any(hi <= lo):
        raise ValueError("bounds must have positive extent")

    area = float((hi[0] - lo[0]) * (hi[1] - lo[1]))
    count = int(round(density * area))
    rng = substream(seed, RNG_KEY_MAP)

    placed_c: list[np.ndarray] = []
    placed_r: list[float] = []
    for k in range(count):
        for _ in range(_ATTEMPTS_PER_OBSTACLE):
            c = rng.uniform(lo, hi)
            r = float(rng.uniform(r_min, r_max))
            if all(np.hypot(*(c - pc)) > r + pr for pc, pr in zip(placed_c, placed_r)):
                placed_c.append(c)
                placed_r.append(r)
                break
        else:
            raise MapGenerationError(
                f"could not place obstacle {k + 1}/{count}: density {density} "
                f"too high for radii in [{r_min}, {r_max}]"
            )

    obstacles = tuple(
        Obstacle(float(c[0]), float(c[1]), r) for c, r in zip(placed_c, placed_r)
    )
    return ObstacleMap(
        obstacles=obstacles,
        bounds_min=(float(lo[0]), float(lo[1])),
        bounds_max=(float(hi[0]), float(hi[1])),
        density=density,
        radius_range=(r_min, r_max),
    )


def nearest_surface_point(p: Vec3, obs: Obstacle) -> tuple[Vec3, float]:
    """Closest point on the cylinder surface at the altitude of ``p``.

    The returned distance is horizontal and signed: negative when ``p``
    is inside the cylinder.  A probe exactly on the axis has no unique
    nearest point; the +North direction is used as the tie-break.
    """
    dn = p.x - obs.center_n
    de = p.y - obs.center_e
    d_axis = math.hypot(dn, de)
    if d_axis > 0.0:
        un, ue = dn / d_axis, de / d_axis
    else:
        un, ue = 1.0, 0.0
    point = Vec3(obs.center_n + obs.r_obs * un,
                 obs.center_e + obs.r_obs * ue,
                 p.z)
    return point, d_axis - obs.r_obs


def agent_obstacle_distances(positions: np.ndarray, omap: ObstacleMap) -> np.ndarray:
    """(N, M) horizontal distances from agent centers to obstacle axes.

    Raw center-to-axis distances; collision checks subtract the agent and
    obstacle radii downstream.
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0] if positions.ndim == 2 else 0
    if len(omap) == 0 or n == 0:
        return np.zeros((n, len(omap)))
    return cdist(positions[:, :2], omap.centers())


def save_map(omap: ObstacleMap, path) -> None:
    """Write one ``center_n center_e radius`` line per obstacle.

    Lines starting with ``#`` are comments; the header records the field
    bounds so re-imported maps keep them.
    """
    lines = [
        "# obstacle map: one cylinder per line (center_n center_e radius), meters",
        f"# bounds {omap.bounds_min[0]!r} {omap.bounds_min[1]!r} "
        f"{omap.bounds_max[0]!r} {omap.bounds_max[1]!r}",
    ]
    for o in omap.obstacles:
        lines.append(f"{o.center_n!r} {o.center_e!r} {o.r_obs!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_map(path) -> ObstacleMap:
    """Parse a map written by :func:`save_map` (or authored by hand)."""
    bounds_min = (0.0, 0.0)
    bounds_max = (0.0, 0.0)
    obstacles: list[Obstacle] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 5 and parts[0] == "bounds":
                bounds_min = (float(parts[1]), float(parts[2]))
                bounds_max = (float(parts[3]), float(parts[4]))
            continue
        vals = line.split()
        if len(vals) != 3:
            raise ValueError(f"bad map line: {raw!r}")
        obstacles.append(Obstacle(float(vals[0]), float(vals[1]), float(vals[2])))
    return ObstacleMap(obstacles=tuple(obstacles),
                       bounds_min=bounds_min, bounds_max=bounds_max)
