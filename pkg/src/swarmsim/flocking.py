"""Decentralized steering: neighbor selection, two command laws, virtual agents.

Each agent computes its own acceleration command from the previous-tick
snapshot of the swarm, so all per-agent computations within a tick are
independent.  Two laws are provided:

``olfati_saber``
    Gradient of a smoothed pairwise potential with its well at d_ref,
    plus a velocity-consensus term over the sensing graph, plus repulsive
    terms against virtual agents projected onto obstacle surfaces.

``vasarhelyi``
    Velocity-space law: self-propulsion at a preferred speed, linear
    short-range repulsion, velocity alignment limited by an ideal braking
    curve, and "shill" virtual agents that push away from obstacles.  The
    desired velocity is turned into an acceleration by a first-order
    tracking rule.

Both laws optionally add a migration term c_mig * (u_mig - v_i) steering
the swarm toward a common target velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .core import SwarmParams, Vec3, clamp_norm
from .environment import ObstacleMap

# Action-function shape constants for the olfati_saber law.  Equal pull
# and push strengths make the offset _ACTION_C vanish and give an odd,
# sigmoid-shaped action function.
_ACTION_A = 5.0
_ACTION_B = 5.0
_ACTION_C = abs(_ACTION_A - _ACTION_B) / math.sqrt(4.0 * _ACTION_A * _ACTION_B)


# ---------------------------------------------------------------------------
# Gain blocks


@dataclass
class OlfatiSaberGains:
    """Gains for the gradient/consensus law.

    c1/c2 pairs weight the position and velocity parts for regular
    neighbors (alpha) and obstacle virtual agents (beta).  sigma_eps and
    the bump cutoffs shape the smoothed norm and its finite-range rolloff.
    obstacle_range is how far obstacle surfaces are sensed and d_obs the
    clearance the repulsive well enforces.
    """

    c1_alpha: float = 1.2
    c2_alpha: float = 2.19  # approximately 2*sqrt(c1_alpha), near-critical damping
    c1_beta: float = 2.5
    c2_beta: float = 3.16
    c_mig: float = 1.0
    sigma_eps: float = 0.1
    bump_h: float = 0.2
    bump_h_beta: float = 0.9
    obstacle_range: float = 30.0
    d_obs: float = 15.0
    interaction_range: Optional[float] = None   # None = use the sensing radius

    def violations(self) -> list[str]:
        out = []
        for name in ("c1_alpha", "c2_alpha", "c1_beta", "c2_beta", "c_mig"):
            if getattr(self, name) < 0:
                out.append(f"olfati_saber gain {name} must be >= 0")
        if not self.sigma_eps > 0:
            out.append("sigma_eps must be > 0")
        if self.interaction_range is not None and not self.interaction_range > 0:
            out.append("interaction_range must be > 0 when set")
        for name in ("bump_h", "bump_h_beta"):
            h = getattr(self, name)
            if not (0.0 < h < 1.0):
                out.append(f"{name} must lie in (0, 1)")
        if not self.obstacle_range > 0:
            out.append("obstacle_range must be > 0")
        if not self.d_obs > 0:
            out.append("d_obs must be > 0")
        return out


@dataclass
class VasarhelyiGains:
    """Gains for the velocity-space law.

    Three interaction blocks: linear repulsion below r0_rep, braking-curve
    limited velocity alignment (frict), and shill agents on obstacle
    surfaces.  v_flock is the preferred cruise speed; dt_ctrl the time
    constant turning the desired velocity into an acceleration command.
    """

    r0_rep: float = 25.0
    p_rep: float = 0.15
    r0_frict: float = 45.0
    c_frict: float = 0.25
    v_frict: float = 0.6
    p_frict: float = 3.0
    a_frict: float = 4.0
    r0_shill: float = 2.0
    v_shill: float = 10.0
    p_shill: float = 3.0
    a_shill: float = 4.0
    v_flock: float = 6.0
    c_mig: float = 1.0
    obstacle_range: float = 60.0
    dt_ctrl: float = 0.5

    def violations(self) -> list[str]:
        out = []
        for name in ("r0_rep", "p_rep", "r0_frict", "c_frict", "v_frict",
                     "p_frict", "a_frict", "r0_shill", "v_shill", "p_shill",
                     "a_shill", "v_flock", "c_mig", "obstacle_range"):
            if getattr(self, name) < 0:
                out.append(f"vasarhelyi gain {name} must be >= 0")
        if not self.dt_ctrl > 0:
            out.append("dt_ctrl must be > 0")
        return out


# ---------------------------------------------------------------------------
# Smoothed-norm machinery for the olfati_saber law


def sigma_norm(d, eps: float):
    """Smoothed norm of a scalar distance: (sqrt(1 + eps*d^2) - 1)/eps.

    Differentiable at zero, unlike the euclidean norm; accepts arrays.
    """
    d = np.asarray(d, dtype=float)
    out = (np.sqrt(1.0 + eps * d * d) - 1.0) / eps
    return float(out) if out.ndim == 0 else out


def bump(s, h: float):
    """Smooth cutoff: 1 on [0, h), cosine rolloff on [h, 1], 0 elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[(s >= 0.0) & (s < h)] = 1.0
    mid = (s >= h) & (s <= 1.0)
    out[mid] = 0.5 * (1.0 + np.cos(np.pi * (s[mid] - h) / (1.0 - h)))
    return float(out) if out.ndim == 0 else out


def _sigma_1(z):
    return z / np.sqrt(1.0 + z * z)


def action_function(z):
    """Odd sigmoid force profile, zero at z = 0, saturating at +/- 5."""
    return 0.5 * ((_ACTION_A + _ACTION_B) * _sigma_1(z + _ACTION_C)
                  + (_ACTION_A - _ACTION_B))


# ---------------------------------------------------------------------------
# Braking curve for the vasarhelyi law


def braking_curve(r, a: float, p: float):
    """Largest allowed velocity difference at distance-overshoot r.

    Linear with slope p close in, then the constant-deceleration envelope
    sqrt(2*a*r - a^2/p^2); zero for r <= 0.  Accepts arrays.
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    if a > 0.0 and p > 0.0:
        rp = r * p
        linear = (rp > 0.0) & (rp <= a / p)
        out[linear] = rp[linear]
        curved = rp > a / p
        out[curved] = np.sqrt(2.0 * a * r[curved] - (a / p) ** 2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Sensing graph


@dataclass(frozen=True)
class SensingGraph:
    """Directed per-tick sensing relation plus its undirected union form.

    adjacency[i, j] is True when agent i senses agent j.  The undirected
    form connects i~j when either direction exists; it is what the
    connectivity metric consumes.  dist caches the pairwise euclidean
    distances the rule was evaluated on.
    """

    adjacency: np.ndarray       # (N, N) bool, False diagonal
    undirected: np.ndarray      # (N, N) bool, symmetric
    dist: np.ndarray            # (N, N) float
    neighbor_lists: tuple       # tuple of int ndarrays, ascending ids

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return self.neighbor_lists[i]


def metric_neighbors(positions: np.ndarray, i: int, r: float) -> np.ndarray:
    """Ids of every agent within distance r of agent i (inclusive), ascending."""
    positions = np.asarray(positions, dtype=float)
    d = np.linalg.norm(positions - positions[i], axis=1)
    mask = d <= r
    mask[i] = False
    return np.nonzero(mask)[0]


def topological_neighbors(positions: np.ndarray, i: int, nn: int) -> np.ndarray:
    """Ids of the nn agents nearest to agent i, ascending.

    Exact distance ties go to the lower agent id, which a stable sort on
    distance with ids in natural order provides for free.
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    d = np.linalg.norm(positions - positions[i], axis=1)
    d[i] = np.inf
    order = np.argsort(d, kind="stable")
    picked = order[: min(nn, n - 1)]
    return np.sort(picked)


def build_graph(positions: np.ndarray, sp: SwarmParams) -> SensingGraph:
    """Evaluate the configured neighbor rule for every agent at once."""
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    dist = cdist(positions, positions) if n else np.zeros((0, 0))
    adj = np.zeros((n, n), dtype=bool)
    if n > 1:
        if sp.neighbor_mode == "metric":
            adj = dist <= sp.radius
            np.fill_diagonal(adj, False)
        else:
            d = dist.copy()
            np.fill_diagonal(d, np.inf)
            k = min(sp.nn, n - 1)
            order = np.argsort(d, axis=1, kind="stable")[:, :k]
            rows = np.repeat(np.arange(n), k)
            adj[rows, order.ravel()] = True
    lists = tuple(np.nonzero(adj[i])[0] for i in range(n))
    return SensingGraph(adjacency=adj, undirected=adj | adj.T,
                        dist=dist, neighbor_lists=lists)


# ---------------------------------------------------------------------------
# Virtual agents


@dataclass(frozen=True)
class VirtualAgent:
    """Obstacle stand-in on the cylinder surface at the focal agent's altitude."""

    position: Vec3
    velocity: Vec3
    obstacle_id: int


def spawn_virtual_agents(
    position,
    velocity,
    omap: ObstacleMap,
    sense_range: float,
    mode: str,
    v_shill: float = 0.0,
) -> list[VirtualAgent]:
    """One virtual agent per obstacle whose surface is within sense_range.

    ``olfati_saber`` mode projects the focal agent's velocity onto the
    cylinder's tangent plane (no radial component, tangential magnitude
    at most the agent's speed).  ``vasarhelyi`` mode assigns a constant
    outward velocity of magnitude v_shill along the surface normal.  An
    agent exactly on a cylinder axis takes the +North surface point.
    """
    if len(omap) == 0:
        return []
    pos = np.asarray(position, dtype=float)
    vel = np.asarray(velocity, dtype=float)
    centers = omap.centers()
    radii = omap.radii()
    dn = pos[0] - centers[:, 0]
    de = pos[1] - centers[:, 1]
    d_axis = np.hypot(dn, de)
    hits = np.nonzero(d_axis - radii <= sense_range)[0]

    out: list[VirtualAgent] = []
    for m in hits:
        if d_axis[m] > 0.0:
            un, ue = dn[m] / d_axis[m], de[m] / d_axis[m]
        else:
            un, ue = 1.0, 0.0
        surface = Vec3(centers[m, 0] + radii[m] * un,
                       centers[m, 1] + radii[m] * ue,
                       pos[2])
        normal = np.array([un, ue, 0.0])
        if mode == "olfati_saber":
            v = vel - np.dot(vel, normal) * normal
        else:
            v = v_shill * normal
        out.append(VirtualAgent(position=surface,
                                velocity=Vec3.from_array(v),
                                obstacle_id=int(m)))
    return out


# ---------------------------------------------------------------------------
# Command laws


def olfati_saber_command(
    i: int,
    positions: np.ndarray,
    velocities: np.ndarray,
    neighbors: Sequence[int],
    virtuals: Sequence[VirtualAgent],
    gains: OlfatiSaberGains,
    sp: SwarmParams,
) -> np.ndarray:
    """Acceleration command for agent i under the gradient/consensus law."""
    p_i = positions[i]
    v_i = velocities[i]
    eps = gains.sigma_eps
    acc = np.zeros(3)

    nb = np.asarray(neighbors, dtype=int)
    if nb.size:
        rel = positions[nb] - p_i                       # (k, 3)
        d = np.linalg.norm(rel, axis=1)
        z = sigma_norm(d, eps)
        lattice_range = (
            gains.interaction_range if gains.interaction_range is not None else sp.radius
        )
        r_alpha = sigma_norm(lattice_range, eps)
        d_alpha = sigma_norm(sp.d_ref, eps)
        grad_dir = rel / np.sqrt(1.0 + eps * d * d)[:, None]
        weight = bump(z / r_alpha, gains.bump_h)
        force = weight * action_function(z - d_alpha)
        acc += gains.c1_alpha * (force[:, None] * grad_dir).sum(axis=0)
        dv = velocities[nb] - v_i
        acc += gains.c2_alpha * (weight[:, None] * dv).sum(axis=0)

    if virtuals:
        d_beta = sigma_norm(gains.d_obs, eps)
        for va in virtuals:
            rel = va.position.as_array() - p_i
            d = float(np.linalg.norm(rel))
            z = sigma_norm(d, eps)
            grad_dir = rel / math.sqrt(1.0 + eps * d * d)
            weight = bump(z / d_beta, gains.bump_h_beta)
            force = weight * (_sigma_1(z - d_beta) - 1.0)
            acc += gains.c1_beta * force * grad_dir
            acc += gains.c2_beta * weight * (va.velocity.as_array() - v_i)

    if sp.migration:
        acc += gains.c_mig * (sp.u_mig.as_array() - v_i)
    return clamp_norm(acc, sp.a_max)


def vasarhelyi_command(
    i: int,
    positions: np.ndarray,
    velocities: np.ndarray,
    neighbors: Sequence[int],
    virtuals: Sequence[VirtualAgent],
    gains: VasarhelyiGains,
    sp: SwarmParams,
) -> np.ndarray:
    """Acceleration command for agent i under the velocity-space law."""
    p_i = positions[i]
    v_i = velocities[i]

    if sp.migration:
        u = sp.u_mig.as_array()
        u_norm = float(np.linalg.norm(u))
        heading = u / u_norm if u_norm > 0.0 else np.zeros(3)
    else:
        speed = float(np.linalg.norm(v_i))
        heading = v_i / speed if speed > 0.0 else np.zeros(3)
    v_des = gains.v_flock * heading

    nb = np.asarray(neighbors, dtype=int)
    if nb.size:
        rel = p_i - positions[nb]                       # points away from j
        d = np.linalg.norm(rel, axis=1)
        close = (d < gains.r0_rep) & (d > 0.0)
        if np.any(close):
            mag = gains.p_rep * (gains.r0_rep - d[close])
            v_des += ((mag / d[close])[:, None] * rel[close]).sum(axis=0)

        dv = velocities[nb] - v_i
        dv_norm = np.linalg.norm(dv, axis=1)
        allowed = np.maximum(
            gains.v_frict,
            braking_curve(d - gains.r0_frict, gains.a_frict, gains.p_frict),
        )
        active = dv_norm > allowed
        if np.any(active):
            mag = gains.c_frict * (dv_norm[active] - allowed[active])
            v_des += ((mag / dv_norm[active])[:, None] * dv[active]).sum(axis=0)

    for va in virtuals:
        dvs = va.velocity.as_array() - v_i
        dvs_norm = float(np.linalg.norm(dvs))
        d_s = float(np.linalg.norm(va.position.as_array() - p_i))
        allowed = braking_curve(d_s - gains.r0_shill, gains.a_shill, gains.p_shill)
        if dvs_norm > allowed:
            v_des += (dvs_norm - allowed) * dvs / dvs_norm

    if sp.migration:
        v_des += gains.c_mig * (sp.u_mig.as_array() - v_i)

    v_des = clamp_norm(v_des, sp.v_max)
    acc = (v_des - v_i) / gains.dt_ctrl
    return clamp_norm(acc, sp.a_max)


def command_for(
    algorithm: str,
    i: int,
    positions: np.ndarray,
    velocities: np.ndarray,
    neighbors: Sequence[int],
    virtuals: Sequence[VirtualAgent],
    sp: SwarmParams,
) -> np.ndarray:
    """Dispatch to the configured law using the gains attached to sp."""
    if algorithm == "olfati_saber":
        return olfati_saber_command(i, positions, velocities, neighbors,
                                    virtuals, sp.gains_olfati_saber, sp)
    if algorithm == "vasarhelyi":
        return vasarhelyi_command(i, positions, velocities, neighbors,
                                  virtuals, sp.gains_vasarhelyi, sp)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def virtual_agents_for(
    algorithm: str,
    position,
    velocity,
    omap: Optional[ObstacleMap],
    sp: SwarmParams,
) -> list[VirtualAgent]:
    """Spawn the virtual agents the configured law expects for one agent."""
    if omap is None or len(omap) == 0:
        return []
    if algorithm == "olfati_saber":
        g = sp.gains_olfati_saber
        return spawn_virtual_agents(position, velocity, omap,
                                    g.obstacle_range, "olfati_saber")
    g = sp.gains_vasarhelyi
    return spawn_virtual_agents(position, velocity, omap, g.obstacle_range,
                                "vasarhelyi", v_shill=g.v_shill)
