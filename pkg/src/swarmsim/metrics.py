"""Swarm performance metrics and per-tick tracking statistics.

Five headline metrics, all pure functions of a single snapshot:

  order          mean pairwise cosine of velocity directions, in [-1, 1]
  safety_agents  1 - (ordered colliding pairs)/(N(N-1))
  safety_obs     1 - (agent-obstacle margin violations)/N, clamped at 0
  union          1 - (n_components - 1)/(N - 1) of the undirected graph
  connectivity   (second-smallest Laplacian eigenvalue)/N

Connectivity is zero exactly when the undirected graph is disconnected,
so it refines the union metric: a positive value implies union = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .environment import ObstacleMap, agent_obstacle_distances
from .flocking import SensingGraph

# Speeds below this are treated as "not moving" in the order metric, and
# Laplacian eigenvalues below it are treated as exactly zero.
_EPS_ZERO = 1e-9


@dataclass(frozen=True)
class MetricsFrame:
    """One row of the metrics time series."""

    t: float
    phi_order: float
    phi_safety_ag: float
    phi_safety_obs: float
    phi_union: float
    phi_connectivity: float
    n_ag: int
    n_obs: int
    dist_min: float
    dist_avg: float
    dist_max: float
    speed_min: float
    speed_avg: float
    speed_max: float
    accel_min: float
    accel_avg: float
    accel_max: float

    @staticmethod
    def header() -> list[str]:
        return [f.name for f in fields(MetricsFrame)]

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in fields(MetricsFrame)]


def order_metric(velocities: np.ndarray) -> float:
    """Mean cosine between all ordered velocity pairs.

    A pair where either agent moves slower than 1e-9 m/s contributes 0.
    Returns NaN for fewer than two agents.
    """
    v = np.asarray(velocities, dtype=float)
    n = v.shape[0]
    if n < 2:
        return float("nan")
    speed = np.linalg.norm(v, axis=1)
    unit = np.zeros_like(v)
    moving = speed > _EPS_ZERO
    unit[moving] = v[moving] / speed[moving, None]
    cos = unit @ unit.T
    total = float(cos.sum() - np.trace(cos))
    return total / (n * (n - 1))


def safety_agents(positions: np.ndarray, r_ag: float,
                  dist: Optional[np.ndarray] = None) -> tuple[float, int]:
    """Fraction of ordered pairs keeping distance >= 2*r_ag, plus the count.

    A colliding pair contributes 2 to n_ag (both orderings).
    """
    p = np.asarray(positions, dtype=float)
    n = p.shape[0]
    if n < 2:
        return 1.0, 0
    if dist is None:
        diff = p[:, None, :] - p[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
    mask = dist < 2.0 * r_ag
    np.fill_diagonal(mask, False)
    n_ag = int(mask.sum())
    return 1.0 - n_ag / (n * (n - 1)), n_ag


def safety_obstacles(positions: np.ndarray, omap: Optional[ObstacleMap],
                     r_ag: float) -> tuple[float, int]:
    """Fraction of agents clear of every obstacle margin, plus the count.

    n_obs counts (agent, obstacle) pairs with axis distance below
    r_ag + r_obs; with overlapping margins it can exceed N, so the
    metric is clamped at 0.
    """
    p = np.asarray(positions, dtype=float)
    n = p.shape[0]
    if omap is None or len(omap) == 0 or n == 0:
        return 1.0, 0
    d = agent_obstacle_distances(p, omap)
    n_obs = int((d < r_ag + omap.radii()[None, :]).sum())
    return max(0.0, 1.0 - n_obs / n), n_obs


def union_metric(graph: SensingGraph) -> tuple[float, int]:
    """Connected-component score of the undirected graph, plus n_components."""
    n = graph.n
    if n < 2:
        return 1.0, min(n, 1) or 1
    adj = csr_matrix(graph.undirected.astype(np.int8))
    n_c, _ = connected_components(adj, directed=False)
    return 1.0 - (n_c - 1) / (n - 1), int(n_c)


def connectivity_metric(graph: SensingGraph) -> float:
    """Second-smallest Laplacian eigenvalue of the undirected graph, over N.

    Values below 1e-9 are clamped to exactly 0 so disconnected graphs
    report 0 rather than eigensolver noise.  NaN for fewer than two agents.
    """
    n = graph.n
    if n < 2:
        return float("nan")
    und = graph.undirected
    off_diag = und.sum() - np.trace(und)
    if off_diag == n * (n - 1):
        # complete graph: the Laplacian spectrum is {0, n, ..., n}, so
        # lambda2/n is 1 without eigensolver roundoff
        return 1.0
    a = und.astype(float)
    lap = np.diag(a.sum(axis=1)) - a
    lambda2 = float(eigvalsh(lap)[1])
    if lambda2 < _EPS_ZERO:
        lambda2 = 0.0
    return lambda2 / n


def tracking_stats(
    positions: np.ndarray,
    velocities: np.ndarray,
    accels: np.ndarray,
    dist: Optional[np.ndarray] = None,
) -> tuple[tuple[float, float, float], ...]:
    """(min, avg, max) of pairwise distance, agent speed, and command accel."""
    p = np.asarray(positions, dtype=float)
    n = p.shape[0]
    if n >= 2:
        if dist is None:
            diff = p[:, None, :] - p[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=2))
        iu = np.triu_indices(n, k=1)
        pair = dist[iu]
        dist_stats = (float(pair.min()), float(pair.mean()), float(pair.max()))
    else:
        dist_stats = (float("nan"),) * 3
    speed = np.linalg.norm(np.asarray(velocities, dtype=float), axis=1)
    accel = np.linalg.norm(np.asarray(accels, dtype=float), axis=1)
    speed_stats = (float(speed.min()), float(speed.mean()), float(speed.max()))
    accel_stats = (float(accel.min()), float(accel.mean()), float(accel.max()))
    return dist_stats, speed_stats, accel_stats


def compute_frame(
    t: float,
    positions: np.ndarray,
    velocities: np.ndarray,
    accels: np.ndarray,
    graph: SensingGraph,
    omap: Optional[ObstacleMap],
    r_ag: float,
) -> MetricsFrame:
    """Assemble the full metrics row for one tick snapshot.

    Reuses the sensing graph's cached distance matrix so the pairwise
    distances are computed once per tick.
    """
    phi_ag, n_ag = safety_agents(positions, r_ag, dist=graph.dist)
    phi_obs, n_obs = safety_obstacles(positions, omap, r_ag)
    phi_u, _ = union_metric(graph)
    d_stats, v_stats, a_stats = tracking_stats(positions, velocities, accels,
                                               dist=graph.dist)
    return MetricsFrame(
        t=t,
        phi_order=order_metric(velocities),
        phi_safety_ag=phi_ag,
        phi_safety_obs=phi_obs,
        phi_union=phi_u,
        phi_connectivity=connectivity_metric(graph),
        n_ag=n_ag,
        n_obs=n_obs,
        dist_min=d_stats[0], dist_avg=d_stats[1], dist_max=d_stats[2],
        speed_min=v_stats[0], speed_avg=v_stats[1], speed_max=v_stats[2],
        accel_min=a_stats[0], accel_avg=a_stats[1], accel_max=a_stats[2],
    )
