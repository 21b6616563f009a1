import numpy as np
import pytest

from agents.replay_buffer import ReplayBuffer, Transition, sample_batch, store_transition
from simulation.observation import reset_stack

SHAPE = (3, 5, 5)


def transition(rng, action=0, reward=1.0, terminal=False):
    obs = (rng.random(SHAPE) < 0.5).astype(np.float32)
    next_obs = (rng.random(SHAPE) < 0.5).astype(np.float32)
    return Transition(obs, action, reward, next_obs, terminal)


def test_round_trip_through_bit_packing(rng):
    buffer = ReplayBuffer(10)
    stored = [transition(rng, action=i % 2, reward=float(i), terminal=i == 3) for i in range(4)]
    for item in stored:
        store_transition(buffer, item)
    contents = buffer.contents()
    assert len(contents) == 4
    for original, restored in zip(stored, contents):
        np.testing.assert_array_equal(restored.obs, original.obs)
        np.testing.assert_array_equal(restored.next_obs, original.next_obs)
        assert (restored.action, restored.reward, restored.terminal) == \
            (original.action, original.reward, original.terminal)


def test_oldest_entries_are_overwritten(rng):
    buffer = ReplayBuffer(3)
    for i in range(5):
        buffer.store(transition(rng, reward=float(i)))
    assert len(buffer) == 3
    assert [item.reward for item in buffer.contents()] == [2.0, 3.0, 4.0]


def test_sample_waits_for_a_full_batch(rng):
    buffer = ReplayBuffer(100)
    for _ in range(7):
        buffer.store(transition(rng))
    assert sample_batch(buffer, 8, rng) is None
    buffer.store(transition(rng))
    batch = sample_batch(buffer, 8, rng)
    assert len(batch) == 8
    assert batch.obs.shape == (8,) + SHAPE
    assert batch.obs.dtype == np.float32


def test_sampling_is_seeded(rng):
    buffer = ReplayBuffer(50)
    for i in range(50):
        buffer.store(transition(rng, reward=float(i)))
    first = buffer.sample(16, np.random.default_rng(5))
    second = buffer.sample(16, np.random.default_rng(5))
    np.testing.assert_array_equal(first.rewards, second.rewards)


def test_frame_stacks_are_accepted(rng):
    buffer = ReplayBuffer(4)
    frame = (rng.random((3, 4, 4)) < 0.5).astype(np.float32)
    stack = reset_stack(frame, 3)
    buffer.store(Transition(stack, 1, -1.0, stack, True))
    assert buffer.contents()[0].obs.shape == (9, 4, 4)


@pytest.mark.parametrize('field, value', [('action', 2), ('action', -1), ('reward', float('nan'))])
def test_invalid_transitions_are_rejected(rng, field, value):
    buffer = ReplayBuffer(4)
    item = transition(rng)
    kwargs = dict(obs=item.obs, action=item.action, reward=item.reward, next_obs=item.next_obs, terminal=False)
    kwargs[field] = value
    with pytest.raises(ValueError):
        buffer.store(Transition(**kwargs))


def test_non_binary_frames_are_rejected(rng):
    buffer = ReplayBuffer(4)
    item = transition(rng)
    with pytest.raises(ValueError):
        buffer.store(Transition(item.obs * 0.5, 0, 0.0, item.next_obs, False))


def test_capacity_must_be_positive():
    with pytest.raises(ValueError):
        ReplayBuffer(0)
