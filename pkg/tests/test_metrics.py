"""The five swarm metrics against independent brute-force oracles."""
import math

import numpy as np
import pytest

from swarmsim.core import SwarmParams
from swarmsim.environment import Obstacle, ObstacleMap, generate_map
from swarmsim.flocking import SensingGraph, build_graph
from swarmsim.metrics import (
    compute_frame,
    connectivity_metric,
    order_metric,
    safety_agents,
    safety_obstacles,
    tracking_stats,
    union_metric,
)

# ---------------------------------------------------------------- oracles
# deliberately naive re-implementations: double loops and a raw
# eigendecomposition, sharing no code with the package


def oracle_order(vel):
    n = len(vel)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ni = math.sqrt(sum(c * c for c in vel[i]))
            nj = math.sqrt(sum(c * c for c in vel[j]))
            if ni < 1e-9 or nj < 1e-9:
                continue
            total += sum(a * b for a, b in zip(vel[i], vel[j])) / (ni * nj)
    return total / (n * (n - 1))


def oracle_safety_agents(pos, r_ag):
    n = len(pos)
    count = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = math.dist(pos[i], pos[j])
            if d < 2.0 * r_ag:
                count += 1
    return 1.0 - count / (n * (n - 1)), count


def oracle_safety_obstacles(pos, omap, r_ag):
    n = len(pos)
    count = 0
    for i in range(n):
        for obs in omap.obstacles:
            d = math.hypot(pos[i][0] - obs.center_n, pos[i][1] - obs.center_e)
            if d < r_ag + obs.r_obs:
                count += 1
    return max(0.0, 1.0 - count / n), count


def oracle_components(adj):
    n = adj.shape[0]
    seen = [False] * n
    comps = 0
    for s in range(n):
        if seen[s]:
            continue
        comps += 1
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            for v in range(n):
                if adj[u, v] and not seen[v]:
                    seen[v] = True
                    stack.append(v)
    return comps


def oracle_union(adj):
    n = adj.shape[0]
    n_c = oracle_components(adj)
    return 1.0 - (n_c - 1) / (n - 1), n_c


def oracle_connectivity(adj):
    n = adj.shape[0]
    a = adj.astype(float)
    lap = np.diag(a.sum(axis=1)) - a
    lam = np.sort(np.linalg.eigvalsh(lap))
    lam2 = lam[1]
    if lam2 < 1e-9:
        lam2 = 0.0
    return lam2 / n


def _graph_from_adjacency(adj, pos=None):
    n = adj.shape[0]
    if pos is None:
        pos = np.zeros((n, 3))
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    und = adj | adj.T
    nbl = tuple(np.flatnonzero(adj[i]) for i in range(n))
    return SensingGraph(adjacency=adj, undirected=und, dist=dist,
                        neighbor_lists=nbl)


def _random_graph(rng, n, p=0.4):
    adj = rng.uniform(size=(n, n)) < p
    np.fill_diagonal(adj, False)
    return adj


# --------------------------------------------------------------- order

def test_order_identical_velocities():
    v = np.tile([3.0, -1.0, 0.5], (6, 1))
    assert order_metric(v) == pytest.approx(1.0)


def test_order_antiparallel_and_orthogonal():
    assert order_metric(np.array([[2.0, 0, 0], [-5.0, 0, 0]])) == pytest.approx(-1.0)
    assert order_metric(np.array([[2.0, 0, 0], [0, 3.0, 0]])) == pytest.approx(0.0)


def test_order_zero_velocity_rule():
    # the stationary agent's pairs contribute zero
    v = np.array([[1.0, 0, 0], [1.0, 0, 0], [0.0, 0, 0]])
    assert order_metric(v) == pytest.approx(2.0 / 6.0)


def test_order_single_agent_nan():
    assert math.isnan(order_metric(np.array([[1.0, 0, 0]])))


def test_order_oracle():
    rng = np.random.default_rng(20)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        v = rng.normal(scale=5.0, size=(n, 3))
        if rng.uniform() < 0.3:
            v[rng.integers(n)] = 0.0    # exercise the degenerate rule
        assert order_metric(v) == pytest.approx(oracle_order(v), abs=1e-12)


# --------------------------------------------------------------- safety

def test_safety_agents_examples():
    # no violation
    pos = np.array([[0.0, 0, 0], [5.0, 0, 0]])
    assert safety_agents(pos, 0.5) == (1.0, 0)
    # N=2 colliding: ordered count 2, phi = 0
    pos = np.array([[0.0, 0, 0], [0.5, 0, 0]])
    phi, n_ag = safety_agents(pos, 0.5)
    assert (phi, n_ag) == (0.0, 2)
    # N=3, one colliding pair: phi = 1 - 2/6
    pos = np.array([[0.0, 0, 0], [0.5, 0, 0], [50.0, 0, 0]])
    phi, n_ag = safety_agents(pos, 0.5)
    assert n_ag == 2
    assert phi == pytest.approx(2.0 / 3.0)


def test_safety_obstacles_examples():
    empty = ObstacleMap(obstacles=(), bounds_min=(0, 0), bounds_max=(1, 1),
                        density=0.0, radius_range=(1.0, 1.0))
    pos = np.array([[0.0, 0, -50.0], [10.0, 0, -50.0]])
    assert safety_obstacles(pos, empty, 0.5) == (1.0, 0)
    assert safety_obstacles(pos, None, 0.5) == (1.0, 0)
    one = ObstacleMap(obstacles=(Obstacle(0.0, 0.0, 2.0),),
                      bounds_min=(-5, -5), bounds_max=(5, 5),
                      density=0.0, radius_range=(2.0, 2.0))
    phi, n_obs = safety_obstacles(pos, one, 0.5)   # agent 0 is inside
    assert n_obs == 1
    assert phi == pytest.approx(0.5)


def test_safety_obstacles_clamped_at_zero():
    # one agent violating three obstacles at once: raw phi would be negative
    obs = tuple(Obstacle(0.0, 0.0 + k * 0.1, 3.0) for k in range(3))
    m = ObstacleMap(obstacles=obs, bounds_min=(-9, -9), bounds_max=(9, 9),
                    density=0.0, radius_range=(3.0, 3.0))
    phi, n_obs = safety_obstacles(np.array([[0.0, 0.0, -50.0]]), m, 0.5)
    assert n_obs == 3
    assert phi == 0.0


def test_safety_oracles_random():
    rng = np.random.default_rng(21)
    m = generate_map((0, 0), (150, 150), 8e-4, (3, 10), seed=2)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        pos = np.column_stack([rng.uniform(0, 150, size=n),
                               rng.uniform(0, 150, size=n),
                               rng.uniform(-60, -40, size=n)])
        r_ag = float(rng.uniform(0.3, 40.0))  # large radii force collisions
        assert safety_agents(pos, r_ag) == pytest.approx(
            oracle_safety_agents(pos, r_ag))
        assert safety_obstacles(pos, m, r_ag) == pytest.approx(
            oracle_safety_obstacles(pos, m, r_ag))


# ----------------------------------------------------- union/connectivity

def test_union_examples():
    n = 4
    full = np.ones((n, n), dtype=bool)
    np.fill_diagonal(full, False)
    assert union_metric(_graph_from_adjacency(full)) == (1.0, 1)
    empty = np.zeros((n, n), dtype=bool)
    assert union_metric(_graph_from_adjacency(empty)) == (0.0, 4)
    # components of size 3 and 2 -> 1 - 1/4
    adj = np.zeros((5, 5), dtype=bool)
    for i, j in ((0, 1), (1, 2), (3, 4)):
        adj[i, j] = adj[j, i] = True
    phi, n_c = union_metric(_graph_from_adjacency(adj))
    assert n_c == 2
    assert phi == pytest.approx(0.75)


def test_connectivity_complete_graph_exact():
    for n in (2, 3, 5, 9, 12):
        adj = np.ones((n, n), dtype=bool)
        np.fill_diagonal(adj, False)
        assert connectivity_metric(_graph_from_adjacency(adj)) == 1.0


def test_connectivity_path3():
    adj = np.zeros((3, 3), dtype=bool)
    adj[0, 1] = adj[1, 0] = adj[1, 2] = adj[2, 1] = True
    phi = connectivity_metric(_graph_from_adjacency(adj))
    assert phi == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_connectivity_disconnected_zero():
    rng = np.random.default_rng(22)
    for _ in range(100):
        n = int(rng.integers(4, 12))
        adj = _random_graph(rng, n, p=0.5)
        # force a split: no edges between the two halves
        k = n // 2
        adj[:k, k:] = False
        adj[k:, :k] = False
        g = _graph_from_adjacency(adj)
        assert connectivity_metric(g) == 0.0
        assert union_metric(g)[1] >= 2


def test_union_connectivity_oracles_random():
    rng = np.random.default_rng(23)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        adj = _random_graph(rng, n)
        g = _graph_from_adjacency(adj)
        und = np.asarray(g.undirected)
        assert union_metric(g) == pytest.approx(oracle_union(und))
        assert connectivity_metric(g) == pytest.approx(
            oracle_connectivity(und), abs=1e-9)


def test_connectivity_edge_addition_monotone():
    """lambda_2 never decreases when an edge is added."""
    rng = np.random.default_rng(24)
    for _ in range(200):
        n = int(rng.integers(3, 12))
        adj = _random_graph(rng, n, p=0.3)
        adj |= adj.T
        missing = [(i, j) for i in range(n) for j in range(i + 1, n)
                   if not adj[i, j]]
        if not missing:
            continue
        i, j = missing[rng.integers(len(missing))]
        before = connectivity_metric(_graph_from_adjacency(adj))
        adj[i, j] = adj[j, i] = True
        after = connectivity_metric(_graph_from_adjacency(adj))
        assert after >= before - 1e-9


def test_complementarity_on_random_graphs():
    rng = np.random.default_rng(25)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        g = _graph_from_adjacency(_random_graph(rng, n))
        if connectivity_metric(g) > 0.0:
            assert union_metric(g)[0] == 1.0


def test_metrics_permutation_invariant():
    rng = np.random.default_rng(26)
    m = generate_map((0, 0), (100, 100), 5e-4, (3, 8), seed=1)
    for _ in range(50):
        n = int(rng.integers(2, 10))
        pos = rng.uniform(0, 100, size=(n, 3))
        vel = rng.normal(size=(n, 3))
        sp = SwarmParams(n_agents=n, neighbor_mode="metric", radius=40.0)
        g = build_graph(pos, sp)
        perm = rng.permutation(n)
        g2 = build_graph(pos[perm], sp)
        assert order_metric(vel) == pytest.approx(order_metric(vel[perm]), abs=1e-12)
        assert safety_agents(pos, 0.5) == safety_agents(pos[perm], 0.5)
        assert safety_obstacles(pos, m, 0.5) == safety_obstacles(pos[perm], m, 0.5)
        assert union_metric(g)[0] == union_metric(g2)[0]
        assert connectivity_metric(g) == pytest.approx(
            connectivity_metric(g2), abs=1e-9)


# ------------------------------------------------------------ tracking

def test_tracking_stats_examples():
    pos = np.array([[0.0, 0, 0], [10.0, 0, 0]])
    vel = np.tile([3.0, 4.0, 0.0], (2, 1))
    acc = np.zeros((2, 3))
    dist, speed, accel = tracking_stats(pos, vel, acc)
    assert dist == pytest.approx((10.0, 10.0, 10.0))
    assert speed == pytest.approx((5.0, 5.0, 5.0))
    assert accel == pytest.approx((0.0, 0.0, 0.0))


def test_tracking_stats_oracle():
    rng = np.random.default_rng(27)
    for _ in range(100):
        n = int(rng.integers(2, 10))
        pos = rng.uniform(-50, 50, size=(n, 3))
        vel = rng.normal(scale=4.0, size=(n, 3))
        acc = rng.normal(scale=2.0, size=(n, 3))
        dist, speed, accel = tracking_stats(pos, vel, acc)
        pair_d = [math.dist(pos[i], pos[j])
                  for i in range(n) for j in range(i + 1, n)]
        speeds = [math.sqrt(sum(c * c for c in v)) for v in vel]
        accels = [math.sqrt(sum(c * c for c in a)) for a in acc]
        assert dist == pytest.approx((min(pair_d), sum(pair_d) / len(pair_d),
                                      max(pair_d)))
        assert speed == pytest.approx((min(speeds), sum(speeds) / n, max(speeds)))
        assert accel == pytest.approx((min(accels), sum(accels) / n, max(accels)))


def test_compute_frame_consistent_with_parts():
    rng = np.random.default_rng(28)
    m = generate_map((0, 0), (100, 100), 6e-4, (3, 8), seed=3)
    n = 8
    pos = rng.uniform(0, 100, size=(n, 3))
    vel = rng.normal(scale=3.0, size=(n, 3))
    acc = rng.normal(size=(n, 3))
    sp = SwarmParams(n_agents=n, neighbor_mode="metric", radius=50.0)
    g = build_graph(pos, sp)
    fr = compute_frame(2.5, pos, vel, acc, g, m, 0.5)
    assert fr.t == 2.5
    assert fr.phi_order == pytest.approx(order_metric(vel))
    assert (fr.phi_safety_ag, fr.n_ag) == safety_agents(pos, 0.5)
    assert (fr.phi_safety_obs, fr.n_obs) == safety_obstacles(pos, m, 0.5)
    assert fr.phi_union == union_metric(g)[0]
    assert fr.phi_connectivity == pytest.approx(connectivity_metric(g))
    d, s, a = tracking_stats(pos, vel, acc)
    assert (fr.dist_min, fr.dist_avg, fr.dist_max) == pytest.approx(d)
    assert (fr.speed_min, fr.speed_avg, fr.speed_max) == pytest.approx(s)
    assert (fr.accel_min, fr.accel_avg, fr.accel_max) == pytest.approx(a)
