import argparse
import logging
import os
from typing import Optional

from harness.benchmark import AGENT_METHOD, run_benchmark, select_best_seed
from harness.report import METRIC_COLUMNS, EvaluationReport, export_report, report_filename
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)


def print_report(report: EvaluationReport) -> None:
    print(f'method: {report.method}  seeds: {report.seed_list}  flow: {report.flow_rate:g} veh/h  '
          f'horizon: {report.horizon:g} s  config: {report.config_hash}')
    for name in METRIC_COLUMNS:
        mean = report.overall['mean'].get(name)
        std = report.overall['std'].get(name)
        if mean is None:
            print(f'  {name}: -')
        else:
            print(f'  {name}: {mean:.4f} +- {std:.4f}')
    if report.latency_ms is not None:
        verdict = 'ok' if report.latency_ok else 'too slow'
        print(f'  decision latency: {report.latency_ms:.3f} ms ({verdict} for a 100 ms control period, '
              f'1 ms reference)')


def save_report(report: EvaluationReport, path: Optional[str]) -> Optional[str]:
    """Write the report to `path`; a directory gets a CSV named after the method and the flow rate."""
    if not path:
        return None
    if os.path.isdir(path) or path.endswith(os.sep):
        os.makedirs(path, exist_ok=True)
        path = os.path.join(path, report_filename(report, 'csv'))
    export_report(report, path)
    logger.info(f'report was written to {path}')
    return path


def bench(args: argparse.Namespace, config: TrainConfig) -> None:
    """Benchmark any method over several seeds: the scenario suite plus continuous traffic per seed."""
    seeds = args.seeds if args.seeds is not None else [config.seed]
    report = run_benchmark(args.method, seeds, config, flow=args.flow, horizon=args.horizon,
                           checkpoint_root=args.checkpoints, workers=args.workers, suite=not args.skip_suite,
                           shield=args.shield)
    print_report(report)
    if args.method == AGENT_METHOD:
        print(f'best seed: {select_best_seed(report)}')
    save_report(report, args.output)
