import numpy as np

from agents.d3qn import build_agent_set
from baselines.policies import RandomPolicy, SignalPolicy
from harness.rollouts import AgentPolicy, run_continuous_flow, run_rollout, run_scenario_suite
from simulation.geometry import Intention
from simulation.scenarios import four_way_scenario
from simulation.world import spawn_scenario
from trainer.scenario_replay import build_scenario_bank


def test_signal_suite_has_no_collisions():
    scenarios = [build_scenario_bank().scenarios[index] for index in (0, 40, 80)]
    records = run_scenario_suite(lambda: SignalPolicy('fttlopt'), scenarios, max_steps=1000)
    assert len(records) == 12
    assert not any(record.collided for record in records)


def test_rollout_stops_at_the_first_collision():
    world = spawn_scenario(four_way_scenario([Intention.STRAIGHT] * 4))

    class AlwaysGo:
        name = 'go'

        def commands(self, world):
            return {vehicle.id: 15.0 for vehicle in world.active_vehicles()}

    world, recorder = run_rollout(world, AlwaysGo(), 500, stop_on_collision=True)
    assert world.collided_now
    assert recorder.rows[-1].step == world.time_step_index


def test_continuous_flow_is_deterministic():
    first, _ = run_continuous_flow(RandomPolicy(np.random.default_rng(1)), 3, 600.0, 60.0)
    second, _ = run_continuous_flow(RandomPolicy(np.random.default_rng(1)), 3, 600.0, 60.0)
    assert first == second
    assert first


def test_agent_policy_commands_every_vehicle(small_architecture, small_settings, rng):
    policy = AgentPolicy(build_agent_set(small_architecture, rng, 10), small_settings)
    world = spawn_scenario(four_way_scenario([Intention.LEFT, Intention.STRAIGHT, Intention.RIGHT, Intention.LEFT]))
    commands = policy.commands(world)
    assert sorted(commands) == [0, 1, 2, 3]
    assert set(commands.values()) <= {0.0, 15.0}
