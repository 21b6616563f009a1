import argparse
import logging
import sys
from typing import List, Optional

from commands.baseline import baseline
from commands.bench import bench
from commands.check import check
from commands.describe import describe
from commands.dump_trajectory import dump_trajectory
from commands.evaluate import evaluate
from commands.train import train
from harness.benchmark import AGENT_METHOD, METHODS
from harness.report import UnknownFormatError
from neural.checkpoint import CheckpointError
from neural.layers import ShapeMismatchError
from simulation.observation import FrameShapeError
from simulation.trajectory import TrajectoryParseError
from simulation.world import ContractViolationError, ScenarioValidationError
from utils.config_utils import PROFILES, ConfigError, get_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONTRACT = 4

BASELINES = tuple(method for method in METHODS if method != AGENT_METHOD)


def parse_seeds(text: str) -> List[int]:
    """`3`, `0,2,5` or `0-9`."""
    seeds = []
    try:
        for part in text.split(','):
            part = part.strip()
            if '-' in part:
                first, last = part.split('-', 1)
                seeds.extend(range(int(first), int(last) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f'cannot read seeds from "{text}"')
    if any(seed < 0 for seed in seeds):
        raise argparse.ArgumentTypeError('seeds must not be negative')
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Shared-policy autonomous intersection management')
    parser.add_argument('--config', help='KEY=value file overriding the profile')
    parser.add_argument('--seed', type=int, help='overrides SEED')
    parser.add_argument('--profile', choices=sorted(PROFILES), default='parity')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    subparsers = parser.add_subparsers(dest='command', required=True)

    train_parser = subparsers.add_parser('train', help='train the three shared policies for one seed')
    train_parser.add_argument('--checkpoints', default='checkpoints')
    train_parser.add_argument('--log', help='training log CSV, defaults to <checkpoints>/seed-<seed>/')

    evaluate_parser = subparsers.add_parser('evaluate', help='greedy pass over the 81 training scenarios')
    evaluate_parser.add_argument('--checkpoints', default='checkpoints')
    evaluate_parser.add_argument('--checkpoint', help='agent set directory, overrides --checkpoints')
    evaluate_parser.add_argument('--shield', action='store_true')
    evaluate_parser.add_argument('--output', help='per-scenario CSV')

    for name, help_text in (('baseline', 'benchmark a signal plan or the random policy'),
                            ('bench', 'benchmark any method over several seeds')):
        sub = subparsers.add_parser(name, help=help_text)
        if name == 'baseline':
            sub.add_argument('--baseline', choices=BASELINES, required=True)
        else:
            sub.add_argument('--method', choices=METHODS, default=AGENT_METHOD)
            sub.add_argument('--checkpoints', default='checkpoints')
            sub.add_argument('--shield', action='store_true')
        sub.add_argument('--seeds', type=parse_seeds, help='e.g. 0-9, defaults to --seed')
        sub.add_argument('--flow', type=float, default=600.0, help='veh/h')
        sub.add_argument('--horizon', type=float, default=600.0, help='seconds of continuous traffic')
        sub.add_argument('--workers', type=int, default=1)
        sub.add_argument('--skip-suite', action='store_true', help='continuous traffic only')
        sub.add_argument('--output', help='report file, .csv or .json')

    describe_parser = subparsers.add_parser('describe', help='layer shapes and parameter counts')
    describe_parser.add_argument('--checkpoint', help='checkpoint file to describe instead of the config')

    dump_parser = subparsers.add_parser('dump-trajectory', help='write the per-step trajectory of one run')
    dump_parser.add_argument('--method', choices=METHODS, default=AGENT_METHOD)
    dump_parser.add_argument('--scenario', help='scenario file; Poisson traffic when omitted')
    dump_parser.add_argument('--flow', type=float, default=600.0)
    dump_parser.add_argument('--horizon', type=float, default=600.0)
    dump_parser.add_argument('--checkpoints', default='checkpoints')
    dump_parser.add_argument('--checkpoint', help='agent set directory, overrides --checkpoints')
    dump_parser.add_argument('--shield', action='store_true')
    dump_parser.add_argument('--frames', help='directory for the first observation frame of every vehicle')
    dump_parser.add_argument('--output', required=True)

    check_parser = subparsers.add_parser('check', help='apply the acceptance thresholds to saved reports')
    check_parser.add_argument('--reports', default='reports', help='directory of <method>-<flow>-vph.csv reports')
    check_parser.add_argument('--flow', type=float, default=600.0)
    return parser


def exit_code(error: Exception) -> int:
    if isinstance(error, (ConfigError, UnknownFormatError, ScenarioValidationError, ShapeMismatchError)):
        return EXIT_USAGE
    if isinstance(error, (OSError, CheckpointError, TrajectoryParseError, FrameShapeError)):
        return EXIT_IO
    if isinstance(error, ContractViolationError):
        return EXIT_CONTRACT
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format='%(asctime)s  %(name)s  %(levelname)s  %(message)s',
                        level=getattr(logging, args.log_level))

    commands_functions = {
        'train': train,
        'evaluate': evaluate,
        'baseline': baseline,
        'bench': bench,
        'describe': describe,
        'dump-trajectory': dump_trajectory,
        'check': check,
    }
    try:
        config = get_config(args.profile, args.config, args.seed)
        commands_functions[args.command](args, config)
    except Exception as e:
        code = exit_code(e)
        if code == EXIT_FAILURE:
            logger.exception(f'{args.command} failed')
        else:
            logger.error(f'{args.command} failed: {e}')
        return code
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
