import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from agents.d3qn import AgentSet, agent_checkpoint_path, load_agent_set
from baselines.policies import RandomPolicy, SignalPolicy
from baselines.signals import PLANS
from harness.metrics import summarize_metrics
from harness.report import EvaluationReport, SeedResult, build_report, seed_result
from harness.rollouts import FLOW_HORIZON, AgentPolicy, run_continuous_flow, run_scenario_suite
from harness.shield import SafetyShield
from neural.network import NetworkParameters, forward
from simulation.geometry import Intention
from trainer.scenario_replay import build_scenario_bank
from trainer.training import checkpoint_dir, episode_settings
from utils.config_utils import TrainConfig, config_hash

logger = logging.getLogger(__name__)

AGENT_METHOD = 'shared-d3qn'
METHODS = (AGENT_METHOD, 'random') + tuple(PLANS)
CONTROL_PERIOD_MS = 100.0


class MissingCheckpointError(FileNotFoundError):
    def __init__(self, seeds: Sequence[int], root):
        self.seeds = list(seeds)
        super().__init__(f'No checkpoint in {root} for seeds {", ".join(map(str, self.seeds))}')


def seed_checkpoint_dir(root, seed: int) -> str:
    return checkpoint_dir(root, seed)


def missing_checkpoints(root, seeds: Sequence[int]) -> List[int]:
    missing = []
    for seed in seeds:
        directory = seed_checkpoint_dir(root, seed)
        if not all(os.path.isfile(agent_checkpoint_path(directory, intention)) for intention in Intention):
            missing.append(seed)
    return missing


def measure_decision_latency(params: NetworkParameters, repeats: int = 50, seed: int = 0) -> float:
    """Median wall-clock milliseconds of one forward pass on a binary observation."""
    architecture = params.architecture
    rng = np.random.default_rng(seed)
    obs = (rng.random((architecture.in_channels, architecture.height, architecture.width)) < 0.3).astype(np.float32)
    forward(params, obs)
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        forward(params, obs)
        timings.append((time.perf_counter() - started) * 1000.0)
    return float(np.median(timings))


def _policy_factory(method: str, seed: int, config: TrainConfig, agent_set: Optional[AgentSet],
                    shield: bool) -> Callable:
    if method == AGENT_METHOD:
        settings = episode_settings(config)
        return lambda: AgentPolicy(agent_set, settings, SafetyShield() if shield else None)
    if method == 'random':
        rng = np.random.default_rng(seed)
        return lambda: RandomPolicy(rng, config.speed_commands)
    return lambda: SignalPolicy(method)


def run_seed(method: str, seed: int, config: TrainConfig, flow: float = 600.0, horizon: float = FLOW_HORIZON,
             checkpoint_root=None, suite: bool = True, shield: bool = False) -> SeedResult:
    """Scenario suite plus one continuous-flow run for one seed."""
    agent_set = None
    if method == AGENT_METHOD:
        agent_set = load_agent_set(seed_checkpoint_dir(checkpoint_root, seed), config.architecture())
    make_policy = _policy_factory(method, seed, config, agent_set, shield)
    suite_summary = None
    if suite:
        scenarios = build_scenario_bank().scenarios
        suite_summary = summarize_metrics(run_scenario_suite(make_policy, scenarios, config.max_episode_steps,
                                                             config.step_length))
    flow_records, _ = run_continuous_flow(make_policy(), seed, flow, horizon, config.step_length)
    result = seed_result(seed, summarize_metrics(flow_records), suite_summary)
    logger.info(f'{method} seed {seed}: collision rate {result.collision_rate}, '
                f'waiting {result.mean_waiting_time}, travel {result.mean_travel_time}')
    return result


def _run_seed_job(job) -> SeedResult:
    return run_seed(*job)


def run_benchmark(method: str, seeds: Sequence[int], config: TrainConfig, flow: float = 600.0,
                  horizon: float = FLOW_HORIZON, checkpoint_root=None, workers: int = 1, suite: bool = True,
                  shield: bool = False) -> EvaluationReport:
    if method not in METHODS:
        raise ValueError(f'Unknown method {method}, expected one of {", ".join(METHODS)}')
    seeds = list(seeds)
    latency = None
    if method == AGENT_METHOD:
        if checkpoint_root is None:
            raise MissingCheckpointError(seeds, checkpoint_root)
        missing = missing_checkpoints(checkpoint_root, seeds)
        if missing:
            raise MissingCheckpointError(missing, checkpoint_root)
        if seeds:
            agent_set = load_agent_set(seed_checkpoint_dir(checkpoint_root, seeds[0]), config.architecture())
            latency = measure_decision_latency(agent_set.agents[0].online)
            logger.info(f'decision latency {latency:.3f} ms (control period {CONTROL_PERIOD_MS:g} ms)')

    jobs = [(method, seed, config, flow, horizon, checkpoint_root, suite, shield) for seed in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_seed_job, jobs))
    else:
        results = [_run_seed_job(job) for job in jobs]
    return build_report(method, results, config_hash(config), flow, horizon, latency, CONTROL_PERIOD_MS)


def select_best_seed(report: EvaluationReport) -> Optional[int]:
    """Seed with the lowest collision rate, ties broken by the lower mean waiting time."""
    if not report.seeds:
        return None
    best = min(report.seeds, key=lambda result: (
        result.collision_rate,
        float('inf') if result.mean_waiting_time is None else result.mean_waiting_time,
        result.seed,
    ))
    return best.seed


AGENT_COLLISION_LIMIT = 0.2
RANDOM_COLLISION_SHARE = 0.5
RANDOM_COLLISION_FLOOR = 0.5
REQUIRED_SEEDS = 2
REPRODUCTION_SEEDS = (0, 1, 2)


@dataclass(frozen=True)
class SeedVerdict:
    seed: int
    collision_rate: float
    mean_waiting_time: Optional[float]
    safe: bool
    faster_than_signals: bool

    @property
    def passed(self) -> bool:
        return self.safe and self.faster_than_signals


@dataclass(frozen=True)
class ReproductionCheck:
    random_collision_rate: float
    best_signal_waiting_time: float
    verdicts: Tuple[SeedVerdict, ...]

    @property
    def random_is_unsafe(self) -> bool:
        return self.random_collision_rate > RANDOM_COLLISION_FLOOR

    @property
    def passed_seeds(self) -> List[int]:
        return [verdict.seed for verdict in self.verdicts if verdict.passed]

    @property
    def passed(self) -> bool:
        return self.random_is_unsafe and len(self.passed_seeds) >= REQUIRED_SEEDS


def _mean_metric(report: EvaluationReport, name: str) -> Optional[float]:
    return report.overall.get('mean', {}).get(name)


def check_reproduction(agent_report: EvaluationReport, random_report: EvaluationReport,
                       signal_reports: Sequence[EvaluationReport]) -> ReproductionCheck:
    """Apply the desk-scale acceptance thresholds to exported reports.

    A seed passes when the agents collide in under AGENT_COLLISION_LIMIT of their vehicles, at most
    RANDOM_COLLISION_SHARE of the random policy's rate, and wait less on average than under every signal plan.
    The check passes when the random policy collides in more than RANDOM_COLLISION_FLOOR of its vehicles and
    at least REQUIRED_SEEDS seeds pass.
    """
    if not signal_reports:
        raise ValueError('At least one signal plan report is needed')
    reports = [agent_report, random_report, *signal_reports]
    flow_rates = {report.flow_rate for report in reports}
    if len(flow_rates) > 1:
        raise ValueError(f'Reports mix flow rates {sorted(flow_rates)}')

    random_rate = _mean_metric(random_report, 'collision_rate')
    if random_rate is None:
        raise ValueError('The random policy report has no seeds')
    waiting_times = [_mean_metric(report, 'mean_waiting_time') for report in signal_reports]
    if any(waiting is None for waiting in waiting_times):
        raise ValueError('Every signal plan report needs a mean waiting time')
    best_signal = min(waiting_times)

    verdicts = []
    for result in agent_report.seeds:
        waiting = result.mean_waiting_time
        verdicts.append(SeedVerdict(
            seed=result.seed,
            collision_rate=result.collision_rate,
            mean_waiting_time=waiting,
            safe=(result.collision_rate < AGENT_COLLISION_LIMIT
                  and result.collision_rate <= RANDOM_COLLISION_SHARE * random_rate),
            faster_than_signals=waiting is not None and waiting < best_signal,
        ))
    check = ReproductionCheck(random_rate, best_signal, tuple(verdicts))
    logger.info(f'random collision rate {random_rate}, best signal waiting {best_signal}, '
                f'passing seeds {check.passed_seeds}')
    return check
