import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from agents.d3qn import AgentSet
from harness.metrics import MetricsRecord, compute_metrics
from simulation.scenarios import ScenarioSpec
from simulation.trajectory import TrajectoryRecorder
from simulation.world import DEFAULT_STEP_LENGTH, spawn_scenario
from trainer.episodes import CommandFilter, EpisodeSettings, run_episode
from trainer.scenario_replay import ScenarioBank

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationRecord:
    scenario_index: int
    scenario: ScenarioSpec
    mean_return: float
    steps: int
    collided: bool
    metrics: Tuple[MetricsRecord, ...]


def evaluate_scenario(agent_set: AgentSet, index: int, scenario: ScenarioSpec, settings: EpisodeSettings,
                      dt: float = DEFAULT_STEP_LENGTH,
                      command_filter: Optional[CommandFilter] = None) -> EvaluationRecord:
    """One greedy episode; nothing is written to the agents."""
    recorder = TrajectoryRecorder()
    world = spawn_scenario(scenario, dt)
    # greedy selection never draws from the generator
    result = run_episode(world, agent_set, settings, np.random.default_rng(0), recorder=recorder,
                         command_filter=command_filter)
    return EvaluationRecord(index, scenario, result.mean_return, result.steps, result.collided,
                            tuple(compute_metrics(recorder.rows, dt)))


def run_evaluation_cycle(agent_set: AgentSet, bank: ScenarioBank, settings: EpisodeSettings,
                         dt: float = DEFAULT_STEP_LENGTH, workers: int = 1,
                         command_filter: Optional[CommandFilter] = None) -> List[EvaluationRecord]:
    """Run every scenario of the bank once, greedily. Records come back in bank order."""
    jobs = list(enumerate(bank.scenarios))

    def evaluate(job):
        index, scenario = job
        return evaluate_scenario(agent_set, index, scenario, settings, dt, command_filter)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(evaluate, jobs))
    else:
        records = [evaluate(job) for job in jobs]

    collisions = sum(record.collided for record in records)
    logger.info(f'evaluation cycle: mean return {np.mean([r.mean_return for r in records]):.3f}, '
                f'{collisions}/{len(records)} scenarios with a collision')
    return records
