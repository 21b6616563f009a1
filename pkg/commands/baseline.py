import argparse
import logging

from commands.bench import print_report, save_report
from harness.benchmark import run_benchmark
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)


def baseline(args: argparse.Namespace, config: TrainConfig) -> None:
    """Benchmark one rule-based method (a signal plan or the random policy)."""
    seeds = args.seeds if args.seeds is not None else [config.seed]
    report = run_benchmark(args.baseline, seeds, config, flow=args.flow, horizon=args.horizon,
                           workers=args.workers, suite=not args.skip_suite)
    print_report(report)
    save_report(report, args.output)
