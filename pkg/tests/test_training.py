import csv
import os
from dataclasses import replace

import numpy as np
import pytest

from agents.d3qn import agent_checkpoint_path, load_agent_set
from simulation.geometry import Intention
from trainer.training import LOG_COLUMNS, checkpoint_dir, train, write_training_log
from utils.config_utils import PROFILES, validate_config


@pytest.fixture
def tiny_config():
    return validate_config(replace(
        PROFILES['parity'],
        training_steps=30, evaluation_period=15, max_episode_steps=10, target_update_period=10,
        frame_size=16, hidden_units=8, batch_size=4, buffer_size=100, log_period=10,
        checkpoint_period=0, seed=3,
    ))


def test_training_is_reproducible(tiny_config, tmp_path):
    first = train(tiny_config, str(tmp_path / 'first'))
    second = train(tiny_config, str(tmp_path / 'second'))
    assert first.log == second.log
    for a, b in zip(first.agent_set.agents, second.agent_set.agents):
        for name, tensor in a.online.tensors.items():
            np.testing.assert_array_equal(tensor, b.online.tensors[name])


def test_training_run_shape(tiny_config, tmp_path):
    result = train(tiny_config, str(tmp_path))
    assert result.steps == 30
    # every episode is cut at MAX_EPISODE_STEPS
    assert result.episodes == 3
    assert [row.kind for row in result.log] == ['progress', 'evaluation', 'progress', 'progress', 'evaluation']
    assert [row.step for row in result.log] == [10, 15, 20, 30, 30]
    assert len(result.evaluations) == 2
    assert all(len(records) == 81 for records in result.evaluations)
    assert result.bank.probabilities.sum() == pytest.approx(1.0)
    assert result.agent_set.epsilon == pytest.approx(1.0 - 30 * tiny_config.epsilon_decay)

    final = checkpoint_dir(str(tmp_path), 3)
    for intention in Intention:
        assert os.path.isfile(agent_checkpoint_path(final, intention))
    assert not os.path.exists(checkpoint_dir(str(tmp_path), 3, 30))
    loaded = load_agent_set(final, tiny_config.architecture())
    for a, b in zip(loaded.agents, result.agent_set.agents):
        np.testing.assert_array_equal(a.online.tensors['fc.weight'], b.online.tensors['fc.weight'])


def test_update_period_spaces_out_learning(tiny_config):
    every_step = train(tiny_config)
    every_other = train(replace(tiny_config, update_period=2))
    for dense, sparse in zip(every_step.agent_set.agents, every_other.agent_set.agents):
        assert sparse.updates <= 15
        assert sparse.updates <= dense.updates
    assert sum(agent.updates for agent in every_other.agent_set.agents) > 0
    assert every_other.agent_set.epsilon == every_step.agent_set.epsilon


def test_periodic_checkpoints(tiny_config, tmp_path):
    train(replace(tiny_config, checkpoint_period=15), str(tmp_path))
    for step in (15, 30):
        assert os.path.isfile(agent_checkpoint_path(checkpoint_dir(str(tmp_path), 3, step), Intention.LEFT))


def test_training_log_csv(tiny_config, tmp_path):
    result = train(tiny_config)
    path = tmp_path / 'log.csv'
    write_training_log(result.log, path)
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        rows = list(reader)
    assert tuple(reader.fieldnames) == LOG_COLUMNS
    assert len(rows) == 5
    assert rows[1]['kind'] == 'evaluation'
    assert rows[1]['loss_left'] == ''
    assert int(rows[1]['episodes']) >= 1
    assert 0 <= int(rows[4]['collided_scenarios']) <= 81


def test_checkpoint_dir_layout():
    assert checkpoint_dir('runs', 2) == os.path.join('runs', 'seed-2', 'final')
    assert checkpoint_dir('runs', 2, 500) == os.path.join('runs', 'seed-2', 'step-0000500')
