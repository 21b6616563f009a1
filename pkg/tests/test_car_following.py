from dataclasses import replace

import pytest

from baselines.car_following import (JunctionView, braking_distance, car_follow_command, conflict_table,
                                     conflict_zone, go_is_safe, signal_commands, time_to_cover)
from baselines.policies import SignalPolicy
from baselines.signals import PLANS, Phase, PhaseGroup, SignalState
from harness.metrics import summarize_metrics
from harness.rollouts import run_continuous_flow
from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec
from simulation.world import VehicleState, spawn_scenario

NS_GREEN = SignalState(PhaseGroup.NS, Phase.GREEN)
EW_GREEN = SignalState(PhaseGroup.EW, Phase.GREEN)


def north_vehicle(s, speed, intention=Intention.STRAIGHT):
    return VehicleState(0, (Approach.N, intention), s=s, speed=speed)


def test_braking_distance():
    assert braking_distance(0.0, 0.1) == 0.0
    # 15 m/s at 4.5 m/s^2 is about 25 m
    assert braking_distance(15.0, 0.1) == pytest.approx(15.0 ** 2 / (2 * 4.5), rel=0.05)
    assert go_is_safe(0.0, 1.0, 0.1)
    assert not go_is_safe(15.0, 10.0, 0.1)


def test_time_to_cover():
    assert time_to_cover(0.0, 5.0) == 0.0
    assert time_to_cover(15.0, 15.0) == pytest.approx(1.0)
    assert time_to_cover(2.6 / 2, 0.0) == pytest.approx(1.0)


def test_red_light_too_close_stops():
    assert car_follow_command(north_vehicle(90.0, 15.0), None, EW_GREEN, 5.0) == 0.0


def test_green_light_goes():
    assert car_follow_command(north_vehicle(90.0, 15.0), None, NS_GREEN, 5.0) == 15.0


def test_close_leader_stops():
    assert car_follow_command(north_vehicle(50.0, 10.0), 1.0, NS_GREEN, 40.0, leader_speed=0.0) == 0.0


def test_yield_request_holds_a_slow_vehicle():
    assert car_follow_command(north_vehicle(97.0, 2.0), None, NS_GREEN, 0.5, must_yield=True) == 0.0


def test_conflict_zones():
    assert conflict_zone((Approach.N, Intention.STRAIGHT), (Approach.E, Intention.STRAIGHT)) is not None
    assert conflict_zone((Approach.N, Intention.STRAIGHT), (Approach.S, Intention.STRAIGHT)) is None
    assert conflict_zone((Approach.N, Intention.RIGHT), (Approach.S, Intention.RIGHT)) is None
    zone = conflict_zone((Approach.N, Intention.STRAIGHT), (Approach.E, Intention.STRAIGHT))
    assert 90.0 < zone.ego_start < zone.ego_end < 125.0
    table = conflict_table()
    assert ((Approach.N, Intention.LEFT), (Approach.S, Intention.STRAIGHT)) in table
    assert ((Approach.N, Intention.STRAIGHT), (Approach.S, Intention.STRAIGHT)) not in table


def test_same_route_has_no_conflict_zone():
    spec = ScenarioSpec(((Approach.N, Intention.LEFT, 0.0), (Approach.N, Intention.LEFT, 5.0)))
    world = spawn_scenario(spec)
    first = world.vehicles[0]
    second = replace(first, id=1, s=20.0)
    view = JunctionView(replace(world, vehicles=(first, second)))
    assert view.zone(first, second) is None
    gap, _ = view.leader(first)
    assert gap == pytest.approx(20.0 - 4.5)


def test_signal_commands():
    world = spawn_scenario(ScenarioSpec(((Approach.N, Intention.STRAIGHT, 0.0), (Approach.E, Intention.STRAIGHT, 0.0))))
    north, east = world.vehicles
    near_line = replace(world, vehicles=(replace(north, s=92.0, speed=10.0), replace(east, s=92.0, speed=10.0)))
    commands = signal_commands(near_line, NS_GREEN)
    assert commands == {0: 15.0, 1: 0.0}


def opposing_left_turns(with_queue: bool):
    world = spawn_scenario(ScenarioSpec(((Approach.N, Intention.LEFT, 0.0),)))
    north_left = VehicleState(0, (Approach.N, Intention.LEFT), s=97.24)
    south_straight = VehicleState(2, (Approach.S, Intention.STRAIGHT), s=89.98)
    vehicles = (north_left, south_straight)
    if with_queue:
        vehicles += (VehicleState(1, (Approach.S, Intention.LEFT), s=97.23),)
    return replace(world, vehicles=vehicles)


def test_left_turn_yields_to_a_free_oncoming_vehicle():
    world = opposing_left_turns(with_queue=False)
    view = JunctionView(world)
    assert view.heads_queue(world.vehicle(2))
    assert view.must_yield(world.vehicle(0))
    assert signal_commands(world, NS_GREEN)[0] == 0.0


def test_left_turn_ignores_an_oncoming_vehicle_stuck_in_a_queue():
    world = opposing_left_turns(with_queue=True)
    view = JunctionView(world)
    assert view.heads_queue(world.vehicle(1))
    assert not view.heads_queue(world.vehicle(2))
    assert not view.must_yield(world.vehicle(0))
    assert signal_commands(world, NS_GREEN)[0] == 15.0


@pytest.mark.slow
@pytest.mark.parametrize('name', sorted(PLANS))
def test_signal_plans_keep_traffic_moving(name):
    for seed in range(10):
        records, world = run_continuous_flow(SignalPolicy(name), seed, 600.0, 600.0)
        summary = summarize_metrics(records)
        # a gridlocked junction leaves dozens of vehicles in the network
        assert summary.censored + len(world.pending) <= 25, (name, seed)


@pytest.mark.slow
@pytest.mark.parametrize('name', sorted(PLANS))
def test_signal_plans_are_collision_free(name):
    for seed in range(10):
        records, world = run_continuous_flow(SignalPolicy(name), seed, 600.0, 600.0)
        assert world.collision_events == ()
        assert summarize_metrics(records).collided == 0
