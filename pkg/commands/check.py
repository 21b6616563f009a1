import argparse
import logging
import os

from baselines.signals import PLANS
from harness.benchmark import AGENT_METHOD, check_reproduction
from harness.report import EvaluationReport, load_report, report_filename
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)


def report_path(directory: str, method: str, flow: float) -> str:
    return os.path.join(directory, report_filename(EvaluationReport(method, flow_rate=flow), 'csv'))


def check(args: argparse.Namespace, config: TrainConfig) -> None:
    """Read the reports `bench` and `baseline` wrote into one directory and apply the acceptance thresholds."""
    agent_report = load_report(report_path(args.reports, AGENT_METHOD, args.flow))
    random_report = load_report(report_path(args.reports, 'random', args.flow))
    signal_reports = [load_report(report_path(args.reports, name, args.flow)) for name in sorted(PLANS)]
    result = check_reproduction(agent_report, random_report, signal_reports)

    print(f'random collision rate: {result.random_collision_rate:.4f} '
          f'({"ok" if result.random_is_unsafe else "too low"})')
    print(f'best signal plan waiting time: {result.best_signal_waiting_time:.4f} s')
    for verdict in result.verdicts:
        waiting = '-' if verdict.mean_waiting_time is None else f'{verdict.mean_waiting_time:.4f}'
        print(f'  seed {verdict.seed}: collision rate {verdict.collision_rate:.4f}, waiting {waiting}  '
              f'{"pass" if verdict.passed else "fail"}')
    print('PASS' if result.passed else 'FAIL')
