import numpy as np
import pytest

from agents.d3qn import (AgentSet, agent_checkpoint_path, anneal_epsilon, assign_agent, build_agent_set,
                         compute_targets, double_dqn_targets, greedy_action, load_agent_set, save_agent_set,
                         select_action, sync_target, update_agent)
from agents.replay_buffer import Batch, Transition
from neural.network import backprop_loss, forward
from simulation.geometry import Intention


@pytest.fixture
def agent_set(small_architecture, rng):
    return build_agent_set(small_architecture, rng, buffer_capacity=64)


def binary(rng, shape, count=None):
    size = shape if count is None else (count,) + shape
    return (rng.random(size) < 0.3).astype(np.float32)


def obs_shape(agent):
    architecture = agent.online.architecture
    return architecture.in_channels, architecture.height, architecture.width


@pytest.mark.parametrize('intention, index', [(Intention.LEFT, 0), (Intention.STRAIGHT, 1), (Intention.RIGHT, 2)])
def test_each_intention_has_its_agent(agent_set, intention, index):
    assert assign_agent(intention) == index
    assert agent_set.for_intention(intention) is agent_set.agents[index]
    assert agent_set.agents[index].intention is intention


def test_agents_start_with_independent_networks(agent_set):
    left, straight, _ = agent_set.agents
    assert not np.array_equal(left.online.tensors['fc.weight'], straight.online.tensors['fc.weight'])
    np.testing.assert_array_equal(left.online.tensors['fc.weight'], left.target.tensors['fc.weight'])
    assert left.online.tensors['fc.weight'] is not left.target.tensors['fc.weight']


def test_greedy_ties_go_to_the_lowest_index():
    assert greedy_action(np.array([1.0, 1.0])) == 0
    assert greedy_action(np.array([0.5, 2.0])) == 1


def test_zero_epsilon_is_greedy(agent_set, rng):
    agent = agent_set.agents[0]
    obs = binary(rng, obs_shape(agent))
    q_values, _, _ = forward(agent.online, obs)
    assert select_action(agent, obs, 0.0, rng) == int(np.argmax(q_values))


def test_full_epsilon_explores_uniformly(agent_set, rng):
    agent = agent_set.agents[1]
    obs = binary(rng, obs_shape(agent))
    actions = [select_action(agent, obs, 1.0, rng) for _ in range(2000)]
    assert 0.45 < np.mean(actions) < 0.55


def test_terminal_targets_are_the_reward():
    targets = double_dqn_targets(np.array([1.0, -10.0]), np.array([False, True]),
                                 np.array([[0.0, 2.0], [5.0, 1.0]]), np.array([[3.0, 4.0], [7.0, 8.0]]), 0.5)
    np.testing.assert_array_equal(targets, [1.0 + 0.5 * 4.0, -10.0])


def test_online_network_picks_and_target_network_evaluates():
    targets = double_dqn_targets(np.array([0.0]), np.array([False]), np.array([[1.0, 0.0]]),
                                 np.array([[-2.0, 9.0]]), 1.0)
    np.testing.assert_array_equal(targets, [-2.0])


def test_equal_networks_reduce_to_the_max_target(agent_set, rng):
    agent = agent_set.agents[2]
    sync_target(agent)
    shape = obs_shape(agent)
    for _ in range(100):
        batch = Batch(binary(rng, shape, 4), rng.integers(0, 2, size=4), rng.normal(size=4),
                      binary(rng, shape, 4), rng.random(4) < 0.3)
        next_q, _, _ = forward(agent.online, batch.next_obs)
        expected = np.where(batch.terminals, batch.rewards,
                            batch.rewards + 0.99 * next_q.max(axis=1).astype(np.float64))
        np.testing.assert_allclose(compute_targets(agent, batch, 0.99), expected, rtol=1e-7, atol=1e-7)


def test_update_waits_for_the_buffer_then_learns(agent_set, rng):
    agent = agent_set.agents[0]
    shape = obs_shape(agent)
    assert update_agent(agent, 4, rng, 0.99) is None
    for i in range(4):
        agent.buffer.store(Transition(binary(rng, shape), i % 2, 1.0, binary(rng, shape), False))
    before = agent.online.copy()
    loss = update_agent(agent, 4, rng, 0.99, grad_clip_norm=1.0)
    assert loss is not None and np.isfinite(loss)
    assert agent.updates == 1
    assert not np.array_equal(before.tensors['fc.weight'], agent.online.tensors['fc.weight'])
    # target network only moves on sync
    np.testing.assert_array_equal(before.tensors['fc.weight'], agent.target.tensors['fc.weight'])
    sync_target(agent)
    np.testing.assert_array_equal(agent.online.tensors['fc.weight'], agent.target.tensors['fc.weight'])


def test_update_loss_matches_the_sampled_batch(agent_set, rng):
    agent = agent_set.agents[1]
    shape = obs_shape(agent)
    for i in range(6):
        agent.buffer.store(Transition(binary(rng, shape), i % 2, float(i), binary(rng, shape), i == 5))
    batch = agent.buffer.sample(4, np.random.default_rng(8))
    expected, _ = backprop_loss(agent.online, batch.obs, batch.actions, compute_targets(agent, batch, 0.9))
    assert update_agent(agent, 4, np.random.default_rng(8), 0.9) == pytest.approx(expected, rel=1e-4)


def anneal(steps, epsilon=1.0, decay=1e-6):
    for _ in range(steps):
        epsilon = anneal_epsilon(epsilon, decay)
    return epsilon


@pytest.mark.parametrize('steps, expected', [(0, 1.0), (500_000, 0.5), (1_000_000, 0.0)])
def test_epsilon_schedule(steps, expected):
    assert anneal(steps) == pytest.approx(expected, abs=1e-9)


def test_anneal_epsilon_floors_at_zero():
    assert anneal_epsilon(0.5, 0.2) == pytest.approx(0.3)
    assert anneal_epsilon(1e-7, 1e-6) == 0.0
    assert anneal(1_000_001) == 0.0
    assert anneal_epsilon(0.4, 0.0) == 0.4


def test_agent_set_checkpoints(agent_set, small_architecture, tmp_path):
    save_agent_set(agent_set, tmp_path / 'final')
    for intention in Intention:
        assert (tmp_path / 'final' / f'{intention.name.lower()}.ckpt').is_file()
        assert agent_checkpoint_path(tmp_path / 'final', intention).endswith(f'{intention.name.lower()}.ckpt')
    loaded = load_agent_set(tmp_path / 'final', small_architecture)
    assert isinstance(loaded, AgentSet)
    assert loaded.epsilon == 0.0
    for original, restored in zip(agent_set.agents, loaded.agents):
        assert restored.intention is original.intention
        for name, tensor in original.online.tensors.items():
            np.testing.assert_array_equal(restored.online.tensors[name], tensor)
