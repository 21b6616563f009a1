"""Training loop: shared-policy agents trained on prioritized four-vehicle scenarios."""
import csv
import logging
import os
import time
from dataclasses import astuple, dataclass, field
from typing import List, Optional

import numpy as np

from agents.d3qn import AgentSet, anneal_epsilon, build_agent_set, save_agent_set, sync_target, update_agent
from simulation.geometry import Intention
from simulation.world import spawn_scenario
from trainer.episodes import EpisodeSettings, run_episode
from trainer.evaluation import EvaluationRecord, run_evaluation_cycle
from trainer.scenario_replay import (ScenarioBank, build_scenario_bank, sample_scenario_index,
                                     update_scenario_distribution)
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)

LOG_COLUMNS = ('kind', 'step', 'epsilon', 'loss_left', 'loss_straight', 'loss_right', 'episodes',
               'mean_return', 'min_return', 'collided_scenarios')


@dataclass(frozen=True)
class TrainingLogRow:
    kind: str
    step: int
    epsilon: float
    loss_left: Optional[float] = None
    loss_straight: Optional[float] = None
    loss_right: Optional[float] = None
    episodes: Optional[int] = None
    mean_return: Optional[float] = None
    min_return: Optional[float] = None
    collided_scenarios: Optional[int] = None


@dataclass
class TrainingResult:
    agent_set: AgentSet
    bank: ScenarioBank
    log: List[TrainingLogRow] = field(default_factory=list)
    evaluations: List[List[EvaluationRecord]] = field(default_factory=list)
    steps: int = 0
    episodes: int = 0


def episode_settings(config: TrainConfig) -> EpisodeSettings:
    return EpisodeSettings(
        max_steps=config.max_episode_steps,
        frame_size=config.frame_size,
        frame_stack=config.frame_stack,
        view_extent=config.view_extent,
        reward_weight=config.reward_weight,
        speed_commands=config.speed_commands,
    )


def checkpoint_dir(root, seed: int, step: Optional[int] = None) -> str:
    """`<root>/seed-<seed>/step-<step>`, or `<root>/seed-<seed>/final` without a step."""
    leaf = 'final' if step is None else f'step-{step:07d}'
    return os.path.join(root, f'seed-{seed}', leaf)


def _mean_or_none(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


class TrainingLoop:
    """Global step counter and everything that happens once per training world step."""

    def __init__(self, config: TrainConfig, checkpoint_root: Optional[str] = None):
        self.config = config
        self.checkpoint_root = checkpoint_root
        init_seed, action_seed, replay_seed, scenario_seed = np.random.SeedSequence(config.seed).spawn(4)
        self.action_rng = np.random.default_rng(action_seed)
        self.replay_rng = np.random.default_rng(replay_seed)
        self.scenario_rng = np.random.default_rng(scenario_seed)
        self.settings = episode_settings(config)
        self.agent_set = build_agent_set(
            config.architecture(), np.random.default_rng(init_seed), config.buffer_size,
            learning_rate=config.learning_rate, gamma=config.discount, epsilon=config.initial_epsilon,
            epsilon_decay=config.epsilon_decay, smoothing=config.rmsprop_smoothing,
            epsilon_stability=config.rmsprop_epsilon,
        )
        self.result = TrainingResult(self.agent_set, build_scenario_bank(config.scenario_floor))
        self.losses: List[List[float]] = [[] for _ in Intention]
        self.started = time.perf_counter()

    @property
    def step(self) -> int:
        return self.result.steps

    @property
    def epsilon(self) -> float:
        return self.agent_set.epsilon

    def learn_step(self) -> bool:
        config = self.config
        self.result.steps += 1
        step = self.result.steps
        if step % config.update_period == 0:
            for index, agent in enumerate(self.agent_set.agents):
                loss = update_agent(agent, config.batch_size, self.replay_rng, config.discount,
                                    config.grad_clip_norm)
                if loss is not None:
                    self.losses[index].append(loss)
        self.agent_set.epsilon = anneal_epsilon(self.agent_set.epsilon, self.agent_set.epsilon_decay)

        if step % config.target_update_period == 0:
            for agent in self.agent_set.agents:
                sync_target(agent)
            logger.debug(f'target networks were synced at step {step}')
        if step % config.log_period == 0:
            self._log_progress()
        if step % config.evaluation_period == 0:
            self.evaluate()
        if self.checkpoint_root and config.checkpoint_period and step % config.checkpoint_period == 0:
            save_agent_set(self.agent_set, checkpoint_dir(self.checkpoint_root, config.seed, step))
        return step >= config.training_steps

    def _log_progress(self) -> None:
        losses = [_mean_or_none(values) for values in self.losses]
        self.losses = [[] for _ in Intention]
        row = TrainingLogRow('progress', self.step, self.epsilon, *losses, episodes=self.result.episodes)
        self.result.log.append(row)
        shown = ', '.join('-' if loss is None else f'{loss:.5f}' for loss in losses)
        rate = self.step / max(time.perf_counter() - self.started, 1e-9)
        hours_left = (self.config.training_steps - self.step) / rate / 3600
        logger.info(f'step {self.step}: epsilon {self.epsilon:.4f}, losses {shown}, '
                    f'{rate:.1f} steps/s, {hours_left:.1f} h left')

    def evaluate(self) -> List[EvaluationRecord]:
        config = self.config
        records = run_evaluation_cycle(self.agent_set, self.result.bank, self.settings, config.step_length,
                                       config.evaluation_workers)
        returns = [record.mean_return for record in records]
        self.result.bank = update_scenario_distribution(self.result.bank, returns, config.scenario_shift)
        self.result.evaluations.append(records)
        self.result.log.append(TrainingLogRow(
            'evaluation', self.step, self.epsilon,
            episodes=self.result.episodes,
            mean_return=float(np.mean(returns)),
            min_return=float(np.min(returns)),
            collided_scenarios=sum(record.collided for record in records),
        ))
        return records

    def run(self) -> TrainingResult:
        config = self.config
        while self.step < config.training_steps:
            index = sample_scenario_index(self.result.bank, self.scenario_rng)
            world = spawn_scenario(self.result.bank.scenarios[index], config.step_length)
            run_episode(world, self.agent_set, self.settings, self.action_rng, learner=self)
            self.result.episodes += 1
        if self.checkpoint_root:
            save_agent_set(self.agent_set, checkpoint_dir(self.checkpoint_root, config.seed))
        logger.info(f'training finished after {self.step} steps and {self.result.episodes} episodes')
        return self.result


def train(config: TrainConfig, checkpoint_root: Optional[str] = None) -> TrainingResult:
    return TrainingLoop(config, checkpoint_root).run()


def write_training_log(rows: List[TrainingLogRow], path) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(LOG_COLUMNS)
        for row in rows:
            writer.writerow(['' if value is None else value for value in astuple(row)])
    logger.debug(f'{len(rows)} training log rows were written to {path}')
