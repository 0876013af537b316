"""Obstacle map generation and geometric queries."""
import numpy as np
import pytest

from swarmsim.core import Vec3
from swarmsim.environment import (
    EMPTY_MAP,
    MapGenerationError,
    Obstacle,
    ObstacleMap,
    agent_obstacle_distances,
    generate_map,
    load_map,
    nearest_surface_point,
    save_map,
)


def test_zero_density_gives_empty_map():
    m = generate_map((0, 0), (100, 100), 0.0, (5, 15), seed=3)
    assert len(m) == 0


def test_generation_deterministic():
    a = generate_map((100, -100), (300, 100), 5e-4, (5, 15), seed=9)
    b = generate_map((100, -100), (300, 100), 5e-4, (5, 15), seed=9)
    assert a.obstacles == b.obstacles
    c = generate_map((100, -100), (300, 100), 5e-4, (5, 15), seed=10)
    assert a.obstacles != c.obstacles


def test_default_field_count_and_overlap():
    """200x200 m at 5e-4 per m^2 -> 20 obstacles, pairwise disjoint."""
    m = generate_map((100, -100), (300, 100), 5e-4, (5, 15), seed=7)
    assert len(m) == round(5e-4 * 200 * 200) == 20
    c = m.centers()
    r = m.radii()
    for i in range(len(m)):
        assert 100 <= c[i][0] <= 300 and -100 <= c[i][1] <= 100
        assert 5 <= r[i] <= 15
        for j in range(i + 1, len(m)):
            gap = np.hypot(*(c[i] - c[j])) - r[i] - r[j]
            assert gap > 0, f"obstacles {i},{j} overlap (gap {gap})"


def test_overlap_free_across_seeds():
    for seed in range(20):
        m = generate_map((0, 0), (120, 120), 1e-3, (3, 10), seed=seed)
        c = m.centers()
        r = m.radii()
        for i in range(len(m)):
            for j in range(i + 1, len(m)):
                assert np.hypot(*(c[i] - c[j])) > r[i] + r[j]


def test_impossible_density_raises():
    # 50 obstacles of radius >= 20 cannot fit in a 100x100 box
    with pytest.raises(MapGenerationError):
        generate_map((0, 0), (100, 100), 5e-3, (20, 25), seed=0)


def test_nearest_surface_point_radial():
    obs = Obstacle(center_n=0.0, center_e=0.0, r_obs=4.0)
    p = Vec3(10.0, 0.0, -30.0)
    surf, d = nearest_surface_point(p, obs)
    assert d == pytest.approx(6.0)
    assert surf.x == pytest.approx(4.0)
    assert surf.y == pytest.approx(0.0)
    assert surf.z == p.z          # at the probe's altitude


def test_nearest_surface_point_on_surface():
    obs = Obstacle(center_n=2.0, center_e=1.0, r_obs=5.0)
    p = Vec3(7.0, 1.0, -10.0)
    surf, d = nearest_surface_point(p, obs)
    assert d == pytest.approx(0.0)
    assert (surf.x, surf.y, surf.z) == pytest.approx((p.x, p.y, p.z))


def test_nearest_surface_point_inside():
    obs = Obstacle(center_n=0.0, center_e=0.0, r_obs=4.0)
    _, d = nearest_surface_point(Vec3(1.0, 0.0, 0.0), obs)
    assert d == pytest.approx(-3.0)


def test_nearest_surface_point_axis_tie_break():
    # probe exactly on the axis: documented +North rule
    obs = Obstacle(center_n=5.0, center_e=-2.0, r_obs=3.0)
    surf, d = nearest_surface_point(Vec3(5.0, -2.0, -20.0), obs)
    assert d == pytest.approx(-3.0)
    assert surf.x == pytest.approx(8.0)
    assert surf.y == pytest.approx(-2.0)


def test_surface_distance_formula_property():
    """distance == horizontal norm to axis minus radius, random probes."""
    rng = np.random.default_rng(11)
    for _ in range(1000):
        cn, ce = rng.uniform(-50, 50, size=2)
        r = rng.uniform(0.5, 20.0)
        obs = Obstacle(center_n=cn, center_e=ce, r_obs=r)
        p = Vec3(*rng.uniform(-80, 80, size=2), rng.uniform(-60, 0))
        _, d = nearest_surface_point(p, obs)
        expect = np.hypot(p.x - cn, p.y - ce) - r
        assert d == pytest.approx(expect, abs=1e-12)


def test_agent_obstacle_distances_empty():
    pos = np.zeros((3, 3))
    assert agent_obstacle_distances(pos, EMPTY_MAP).shape == (3, 0)


def test_agent_obstacle_distances_single():
    m = ObstacleMap(obstacles=(Obstacle(10.0, 0.0, 2.0),),
                    bounds_min=(0, -10), bounds_max=(20, 10),
                    density=0.0, radius_range=(2.0, 2.0))
    d = agent_obstacle_distances(np.array([[0.0, 0.0, -5.0]]), m)
    assert d.shape == (1, 1)
    assert d[0, 0] == pytest.approx(10.0)  # axis distance, radii not subtracted


def test_agent_obstacle_distances_oracle():
    rng = np.random.default_rng(4)
    m = generate_map((0, 0), (200, 200), 3e-4, (4, 12), seed=5)
    pos = np.column_stack([rng.uniform(0, 200, size=8),
                           rng.uniform(0, 200, size=8),
                           rng.uniform(-60, -40, size=8)])
    d = agent_obstacle_distances(pos, m)
    for i in range(8):
        for k, obs in enumerate(m.obstacles):
            expect = np.hypot(pos[i, 0] - obs.center_n, pos[i, 1] - obs.center_e)
            assert d[i, k] == pytest.approx(expect, abs=1e-12)


def test_map_save_load_round_trip(tmp_path):
    m = generate_map((100, -100), (300, 100), 5e-4, (5, 15), seed=7)
    path = tmp_path / "field.txt"
    save_map(m, path)
    m2 = load_map(path)
    assert m2.obstacles == m.obstacles
    assert m2.bounds_min == m.bounds_min
    assert m2.bounds_max == m.bounds_max


def test_obstacle_radius_invariant():
    with pytest.raises(ValueError):
        Obstacle(center_n=0.0, center_e=0.0, r_obs=0.0)
