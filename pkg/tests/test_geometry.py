import math

import numpy as np
import pytest

from simulation.geometry import (APPROACH_LENGTH, EXIT_LENGTH, ROUTES, Approach, Intention, build_geometry,
                                 exit_road, get_geometry, route_path)


def test_twelve_routes():
    assert len(ROUTES) == 12
    assert set(get_geometry().route_paths) == set(ROUTES)


@pytest.mark.parametrize('approach, intention, expected', [
    (Approach.N, Intention.STRAIGHT, Approach.S),
    (Approach.N, Intention.LEFT, Approach.E),
    (Approach.N, Intention.RIGHT, Approach.W),
    (Approach.E, Intention.LEFT, Approach.S),
    (Approach.W, Intention.RIGHT, Approach.N),
])
def test_exit_road(approach, intention, expected):
    assert exit_road(approach, intention) is expected


def test_straight_path_length():
    geometry = get_geometry()
    path = route_path(Approach.N, Intention.STRAIGHT)
    assert path.length == pytest.approx(APPROACH_LENGTH + 2 * geometry.stop_line_offset + EXIT_LENGTH)
    assert path.stop_s == pytest.approx(APPROACH_LENGTH)
    assert path.exit_s == pytest.approx(APPROACH_LENGTH + 2 * geometry.stop_line_offset)


@pytest.mark.parametrize('route', ROUTES)
def test_paths_increase_strictly_and_start_on_the_approach(route):
    path = route_path(*route)
    assert np.all(np.diff(path.cumulative) > 0)
    assert path.stop_s < path.exit_s <= path.length
    x, y, _, _ = path.pose_at(0.0)
    assert math.hypot(x, y) == pytest.approx(get_geometry().road_extent, abs=2.0)


@pytest.mark.parametrize('intention', list(Intention))
def test_approaches_are_rotations_of_each_other(intention):
    north = route_path(Approach.N, intention)
    east = route_path(Approach.E, intention)
    assert east.length == pytest.approx(north.length)
    x, y, _, _ = north.pose_at(30.0)
    ex, ey, _, _ = east.pose_at(30.0)
    assert (ex, ey) == pytest.approx((y, -x))


def test_pose_is_clamped_to_the_path():
    path = route_path(Approach.S, Intention.LEFT)
    assert path.pose_at(-5.0) == path.pose_at(0.0)
    assert path.pose_at(path.length + 5.0) == path.pose_at(path.length)


def test_right_turn_is_the_shortest_route():
    right = route_path(Approach.N, Intention.RIGHT).length
    assert right < route_path(Approach.N, Intention.STRAIGHT).length
    assert right < route_path(Approach.N, Intention.LEFT).length


def test_custom_geometry_is_independent():
    geometry = build_geometry(approach_length=60.0)
    assert route_path(Approach.N, Intention.STRAIGHT, geometry).stop_s == pytest.approx(60.0)
    assert route_path(Approach.N, Intention.STRAIGHT).stop_s == pytest.approx(APPROACH_LENGTH)
