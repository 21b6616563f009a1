import numpy as np
import pytest

from baselines.policies import RandomPolicy, SignalPolicy, random_policy
from baselines.signals import Phase
from simulation.geometry import Intention
from simulation.scenarios import four_way_scenario
from simulation.world import spawn_scenario


def test_random_policy_is_uniform():
    rng = np.random.default_rng(0)
    draws = [random_policy(None, rng) for _ in range(10_000)]
    assert set(draws) == {0, 1}
    assert np.mean(draws) == pytest.approx(0.5, abs=0.015)


def test_random_policy_commands_every_vehicle():
    world = spawn_scenario(four_way_scenario([Intention.LEFT] * 4))
    commands = RandomPolicy(np.random.default_rng(0)).commands(world)
    assert sorted(commands) == [0, 1, 2, 3]
    assert set(commands.values()) <= {0.0, 15.0}


def test_signal_policy():
    world = spawn_scenario(four_way_scenario([Intention.STRAIGHT] * 4))
    policy = SignalPolicy('fttl1')
    commands = policy.commands(world)
    assert sorted(commands) == [0, 1, 2, 3]
    assert policy.signal.phase is Phase.GREEN
    with pytest.raises(KeyError):
        SignalPolicy('roundabout')
