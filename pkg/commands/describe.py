import argparse
import logging

from neural.checkpoint import load_checkpoint
from neural.network import describe_architecture
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)


def describe(args: argparse.Namespace, config: TrainConfig) -> None:
    """Print layer shapes and parameter counts of the configured network or of a checkpoint file."""
    if args.checkpoint:
        architecture = load_checkpoint(args.checkpoint).architecture
        logger.debug(f'architecture was read from {args.checkpoint}')
    else:
        architecture = config.architecture()

    rows = describe_architecture(architecture)
    width = max(len(label) for label, _, _ in rows)
    for label, shape, count in rows:
        print(f'{label:<{width}}  {shape:>10}  {count:>10,}')
    print(f'{"total":<{width}}  {"":>10}  {sum(count for _, _, count in rows):>10,}')
