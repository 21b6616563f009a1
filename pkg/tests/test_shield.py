from dataclasses import replace

import pytest

from harness.shield import SafetyShield
from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec
from simulation.world import VehicleState, spawn_scenario, step_world

ROUTE = (Approach.N, Intention.STRAIGHT)


def queue_world(follower_s):
    """A stopped vehicle at s=50 and a stopped follower behind it on the same lane."""
    world = spawn_scenario(ScenarioSpec())
    vehicles = (VehicleState(0, ROUTE, s=50.0), VehicleState(1, ROUTE, s=follower_s))
    return replace(world, vehicles=vehicles)


def test_follower_is_held_back():
    world = queue_world(50.0 - 4.5 - 0.8)
    shield = SafetyShield()
    assert shield(world, {0: 0.0, 1: 15.0}) == {0: 0.0, 1: 0.0}
    assert shield.overrides == 1


def test_unshielded_follower_collides_and_shielded_one_does_not():
    world = queue_world(50.0 - 4.5 - 0.8)
    collided = False
    for _ in range(10):
        world = step_world(world, {0: 0.0, 1: 15.0})
        collided = collided or bool(world.collided_now)
        if world.collided_now:
            break
    assert collided

    world = queue_world(50.0 - 4.5 - 0.8)
    shield = SafetyShield()
    for _ in range(30):
        world = step_world(world, shield(world, {0: 0.0, 1: 15.0}))
    assert world.collision_events == ()
    assert shield.overrides == 30


def test_distant_vehicle_keeps_its_command():
    world = queue_world(10.0)
    shield = SafetyShield()
    assert shield(world, {0: 0.0, 1: 15.0}) == {0: 0.0, 1: 15.0}
    assert shield.overrides == 0


@pytest.mark.parametrize('commands', [{0: 0.0, 1: 0.0}, {0: 15.0, 1: 0.0}])
def test_stop_commands_pass_through(commands):
    assert SafetyShield()(queue_world(44.0), commands) == commands
