"""Neighbor selection rules and the per-tick sensing graph."""
import numpy as np

from swarmsim.core import SwarmParams
from swarmsim.flocking import build_graph, metric_neighbors, topological_neighbors


def _random_positions(rng, n, spread=200.0):
    return rng.uniform(-spread, spread, size=(n, 3))


def test_metric_line_example():
    pos = np.array([[0.0, 0, 0], [100.0, 0, 0], [200.0, 0, 0]])
    assert list(metric_neighbors(pos, 0, 150.0)) == [1]
    assert list(metric_neighbors(pos, 1, 150.0)) == [0, 2]


def test_metric_empty_when_radius_small():
    rng = np.random.default_rng(0)
    pos = _random_positions(rng, 10)
    dmin = min(np.linalg.norm(pos[i] - pos[j])
               for i in range(10) for j in range(i + 1, 10))
    assert list(metric_neighbors(pos, 3, dmin * 0.5)) == []


def test_metric_inclusive_boundary():
    pos = np.array([[0.0, 0, 0], [10.0, 0, 0]])
    assert list(metric_neighbors(pos, 0, 10.0)) == [1]   # d == r counts
    assert list(metric_neighbors(pos, 0, 9.999999)) == []


def test_metric_brute_force_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 25))
        pos = _random_positions(rng, n)
        r = float(rng.uniform(50, 350))
        i = int(rng.integers(n))
        expect = [j for j in range(n) if j != i
                  and np.linalg.norm(pos[j] - pos[i]) <= r]
        assert list(metric_neighbors(pos, i, r)) == expect


def test_topological_basic():
    pos = np.array([[0.0, 0, 0], [10.0, 0, 0], [20.0, 0, 0]])
    assert list(topological_neighbors(pos, 0, 1)) == [1]
    assert list(topological_neighbors(pos, 1, 2)) == [0, 2]


def test_topological_all_others_boundary():
    rng = np.random.default_rng(2)
    pos = _random_positions(rng, 8)
    nb = topological_neighbors(pos, 5, 7)
    assert sorted(nb) == [0, 1, 2, 3, 4, 6, 7]


def test_topological_tie_break_lower_id():
    # two agents exactly equidistant from the focal one
    pos = np.array([[0.0, 0, 0], [5.0, 0, 0], [-5.0, 0, 0], [50.0, 0, 0]])
    nb = topological_neighbors(pos, 0, 1)
    assert list(nb) == [1]      # id 1 beats id 2 at the same distance


def test_topological_full_sort_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(3, 30))
        pos = _random_positions(rng, n)
        nn = int(rng.integers(1, n))
        i = int(rng.integers(n))
        d = np.linalg.norm(pos - pos[i], axis=1)
        d[i] = np.inf
        order = sorted(range(n), key=lambda j: (d[j], j))
        expect = sorted(order[:nn])
        assert sorted(topological_neighbors(pos, i, nn)) == expect


def test_graph_metric_symmetric():
    rng = np.random.default_rng(4)
    sp = SwarmParams(n_agents=12, neighbor_mode="metric", radius=180.0, nn=3)
    pos = _random_positions(rng, 12)
    g = build_graph(pos, sp)
    assert np.array_equal(g.adjacency, g.adjacency.T)
    assert np.array_equal(g.adjacency, g.undirected)
    assert not g.adjacency.diagonal().any()


def test_graph_topological_asymmetry():
    """Hand case: 1's nearest is 0, but 2's nearest is 1."""
    pos = np.array([[0.0, 0, 0], [10.0, 0, 0], [100.0, 0, 0]])
    sp = SwarmParams(n_agents=3, neighbor_mode="topological", nn=1)
    g = build_graph(pos, sp)
    assert g.adjacency[2, 1] and not g.adjacency[1, 2]
    assert g.undirected[1, 2] and g.undirected[2, 1]   # union symmetrization


def test_graph_single_agent():
    sp = SwarmParams(n_agents=1, neighbor_mode="topological", nn=10)
    g = build_graph(np.zeros((1, 3)), sp)
    assert g.adjacency.sum() == 0
    assert g.neighbors(0).size == 0


def test_graph_topological_cardinality():
    rng = np.random.default_rng(5)
    for n, nn in ((2, 1), (6, 3), (9, 8), (15, 10)):
        sp = SwarmParams(n_agents=n, neighbor_mode="topological",
                         nn=min(nn, n - 1))
        g = build_graph(_random_positions(rng, n), sp)
        for i in range(n):
            assert g.neighbors(i).size == min(nn, n - 1)


def test_graph_matches_neighbor_functions():
    rng = np.random.default_rng(6)
    pos = _random_positions(rng, 20)
    sp_m = SwarmParams(n_agents=20, neighbor_mode="metric", radius=250.0)
    g = build_graph(pos, sp_m)
    for i in range(20):
        assert np.array_equal(g.neighbors(i), metric_neighbors(pos, i, 250.0))
    sp_t = SwarmParams(n_agents=20, neighbor_mode="topological", nn=10)
    g = build_graph(pos, sp_t)
    for i in range(20):
        assert np.array_equal(g.neighbors(i), topological_neighbors(pos, i, 10))


def test_graph_distance_matrix():
    rng = np.random.default_rng(7)
    pos = _random_positions(rng, 9)
    g = build_graph(pos, SwarmParams(n_agents=9, neighbor_mode="metric",
                                     radius=100.0))
    expect = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    assert np.allclose(g.dist, expect, atol=1e-9)
