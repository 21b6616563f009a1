import argparse
import csv
import logging

import numpy as np

from agents.d3qn import load_agent_set
from harness.shield import SafetyShield
from trainer.evaluation import run_evaluation_cycle
from trainer.scenario_replay import build_scenario_bank
from trainer.training import checkpoint_dir, episode_settings
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)

EVALUATION_COLUMNS = ('scenario_index', 'scenario', 'mean_return', 'steps', 'collided')


def evaluate(args: argparse.Namespace, config: TrainConfig) -> None:
    """Greedy pass over the 81 training scenarios with a trained agent set."""
    directory = args.checkpoint or checkpoint_dir(args.checkpoints, config.seed)
    agent_set = load_agent_set(directory, config.architecture())
    logger.debug(f'agent set was loaded from {directory}')

    command_filter = SafetyShield() if args.shield else None
    records = run_evaluation_cycle(agent_set, build_scenario_bank(config.scenario_floor), episode_settings(config),
                                   config.step_length, config.evaluation_workers, command_filter)

    returns = [record.mean_return for record in records]
    print(f'scenarios: {len(records)}')
    print(f'mean return: {np.mean(returns):.3f} (min {np.min(returns):.3f}, max {np.max(returns):.3f})')
    print(f'scenarios with a collision: {sum(record.collided for record in records)}')

    if args.output:
        with open(args.output, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(EVALUATION_COLUMNS)
            for record in records:
                writer.writerow([record.scenario_index, record.scenario.label, f'{record.mean_return:.6f}',
                                 record.steps, int(record.collided)])
        logger.info(f'evaluation records were written to {args.output}')
