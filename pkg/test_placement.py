#!/usr/bin/env python3
"""
Testes do posicionamento min-max dos relays
"""

import math

import numpy as np
import pytest

from src.errors import DomainError
from src.models.channel import SystemConfig, dbm_to_watts
from src.optimization.placement import (
    Obstacle, PlacementConfig, Topology, equidistant_topology, optimize_placement,
    placement_report, segment_blocked,
)

SOURCE = (100.0, 100.0)
DESTINATION = (2000.0, 2000.0)
ONE_OBSTACLE = [Obstacle(center=(600.0, 1000.0), radius=500.0)]
TWO_OBSTACLES = ONE_OBSTACLE + [Obstacle(center=(1600.0, 1200.0), radius=200.0)]

ONE_OBSTACLE_MAX = {1: 1379.5, 2: 910.6, 3: 684.6, 4: 546.3}
TWO_OBSTACLES_MAX = {1: 1574.4, 2: 965.1, 3: 736.8, 4: 586.4}


def test_segment_blocked_margin():
    obstacle = Obstacle(center=(0.0, 5.0), radius=2.0)
    blocked, margin = segment_blocked((-10.0, 0.0), (10.0, 0.0), obstacle)
    assert not blocked
    assert margin == pytest.approx(-3.0)
    blocked, margin = segment_blocked((-10.0, 4.0), (10.0, 4.0), obstacle)
    assert blocked
    assert margin == pytest.approx(1.0)
    # ponto mais próximo fora do segmento: distância até a extremidade
    _, margin = segment_blocked((3.0, 5.0), (10.0, 5.0), obstacle)
    assert margin == pytest.approx(-1.0)
    with pytest.raises(DomainError):
        segment_blocked((1.0, 1.0), (1.0, 1.0), obstacle)


def test_obstacle_validation():
    with pytest.raises(DomainError):
        Obstacle(center=(0.0, 0.0), radius=0.0)
    assert Obstacle(center=(0.0, 0.0), radius=1.0).contains((0.5, 0.5))


def test_equidistant_topology():
    topology = equidistant_topology((0.0, 0.0), (2000.0, 0.0), 3)
    assert topology.relays == [(500.0, 0.0), (1000.0, 0.0), (1500.0, 0.0)]
    assert topology.link_distances == pytest.approx([500.0] * 4)
    assert topology.is_feasible()
    with pytest.raises(DomainError):
        equidistant_topology((0.0, 0.0), (1.0, 0.0), 0)


def test_blocked_links_are_reported():
    topology = equidistant_topology(SOURCE, DESTINATION, 1, ONE_OBSTACLE)
    assert topology.blocked_links() == [(0, 0)]
    assert not topology.is_feasible()
    assert topology.to_dict()['obstacles'][0]['radius'] == 500.0


@pytest.mark.parametrize("n", [1, 2, 4])
def test_no_obstacles_gives_equal_spacing(n):
    topology = optimize_placement((0.0, 0.0), (2000.0, 0.0), n)
    assert topology.max_distance == pytest.approx(2000.0 / (n + 1), rel=1e-6)


def test_invalid_endpoints():
    with pytest.raises(DomainError):
        optimize_placement((5.0, 5.0), (5.0, 5.0), 2)
    with pytest.raises(DomainError):
        optimize_placement((600.0, 900.0), DESTINATION, 2, ONE_OBSTACLE)


def _check_row(topology, expected_max):
    distances = topology.link_distances
    assert topology.max_distance == pytest.approx(expected_max, rel=5e-3)
    assert (max(distances) - min(distances)) / max(distances) < 0.01
    assert topology.blocked_links() == []


def test_single_relay_around_one_obstacle():
    topology = optimize_placement(SOURCE, DESTINATION, 1, ONE_OBSTACLE)
    _check_row(topology, ONE_OBSTACLE_MAX[1])
    relay = topology.relays[0]
    expected = (1271.2, 828.8)
    mirrored = (828.8, 1271.2)
    assert (math.dist(relay, expected) <= 0.02 * 1271.2
            or math.dist(relay, mirrored) <= 0.02 * 1271.2)


def brute_force_single_relay(source, destination, obstacles, step=10.0):
    """Menor distância máxima com um relay, varrendo uma grade regular"""
    xs = np.arange(-600.0, 2700.0 + step, step)
    ys = np.arange(-600.0, 2700.0 + step, step)
    gx, gy = np.meshgrid(xs, ys)
    relays = np.stack([gx.ravel(), gy.ravel()], axis=1)
    feasible = np.ones(len(relays), dtype=bool)
    for end in (np.asarray(source), np.asarray(destination)):
        d = relays - end
        for obstacle in obstacles:
            f = np.asarray(obstacle.center) - end
            t = np.clip((d @ f) / np.einsum('ij,ij->i', d, d), 0.0, 1.0)
            closest = end + t[:, None] * d
            feasible &= np.linalg.norm(closest - obstacle.center, axis=1) >= obstacle.radius
    worst = np.maximum(np.linalg.norm(relays - source, axis=1), np.linalg.norm(relays - destination, axis=1))
    return float(np.min(worst[feasible]))


def test_tabulated_two_obstacle_relays_are_blocked():
    single = Topology(SOURCE, DESTINATION, [(1271.2, 828.8)], TWO_OBSTACLES)
    assert (1, 1) in single.blocked_links()
    assert TWO_OBSTACLES[1].contains((1467.6, 1261.2))


def test_single_relay_around_two_obstacles_matches_brute_force():
    topology = optimize_placement(SOURCE, DESTINATION, 1, TWO_OBSTACLES)
    reference = brute_force_single_relay(SOURCE, DESTINATION, TWO_OBSTACLES)
    assert topology.blocked_links() == []
    assert reference - 10.0 <= topology.max_distance <= reference * (1 + 1e-3)
    assert topology.max_distance == pytest.approx(TWO_OBSTACLES_MAX[1], rel=5e-3)


def test_placement_is_deterministic():
    config = PlacementConfig(starts=4, seed=7)
    first = optimize_placement(SOURCE, DESTINATION, 2, ONE_OBSTACLE, config)
    again = optimize_placement(SOURCE, DESTINATION, 2, ONE_OBSTACLE, config)
    assert first.relays == again.relays


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 4])
def test_one_obstacle_rows(n):
    _check_row(optimize_placement(SOURCE, DESTINATION, n, ONE_OBSTACLE), ONE_OBSTACLE_MAX[n])


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 4])
def test_two_obstacle_rows(n):
    topology = optimize_placement(SOURCE, DESTINATION, n, TWO_OBSTACLES)
    assert topology.blocked_links() == []
    assert topology.max_distance == pytest.approx(TWO_OBSTACLES_MAX[n], rel=5e-3)
    # o segundo obstáculo só pode aumentar a maior distância
    assert topology.max_distance >= ONE_OBSTACLE_MAX[n] * (1 - 5e-3)


def test_placement_report_uses_full_channel_model():
    topology = Topology(source=(0.0, 0.0), destination=(2000.0, 0.0),
                        relays=[(500.0, 0.0), (1100.0, 0.0), (1500.0, 0.0)])
    report = placement_report(topology, 4.0, 12e-3, SystemConfig(p_link=dbm_to_watts(30.0)))
    assert report.link_distances == pytest.approx([500.0, 600.0, 400.0, 500.0])
    assert report.max_distance == pytest.approx(600.0)
    assert report.max_link == 1
    assert report.e2e_outage >= report.e2e_bound
    assert report.to_dict()['max_link'] == 1
