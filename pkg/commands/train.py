import argparse
import logging
import os

from trainer.training import checkpoint_dir, train as run_training, write_training_log
from utils.config_utils import TrainConfig, config_hash

logger = logging.getLogger(__name__)


def train(args: argparse.Namespace, config: TrainConfig) -> None:
    """Train the three shared policies for one seed, then write the training log next to the checkpoints."""
    logger.info(f'training seed {config.seed} for {config.training_steps} steps, config {config_hash(config)}')
    result = run_training(config, args.checkpoints)

    log_path = args.log or os.path.join(os.path.dirname(checkpoint_dir(args.checkpoints, config.seed)),
                                        'training_log.csv')
    log_dir = os.path.dirname(log_path)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
    write_training_log(result.log, log_path)
    logger.info(f'final checkpoint: {checkpoint_dir(args.checkpoints, config.seed)}, log: {log_path}')
