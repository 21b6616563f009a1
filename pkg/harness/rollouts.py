"""Closed-loop runs of any method: the 81-scenario suite and continuous Poisson traffic."""
import logging
from typing import Dict, List, Optional, Protocol, Tuple

import numpy as np

from agents.d3qn import AgentSet, greedy_action
from agents.replay_buffer import observation_tensor
from baselines.arrivals import ArrivalProcess
from harness.metrics import MetricsRecord, compute_metrics
from harness.shield import SafetyShield
from neural.network import forward
from simulation.scenarios import ScenarioSpec
from simulation.trajectory import TrajectoryRecorder
from simulation.world import DEFAULT_STEP_LENGTH, WorldState, spawn_scenario, step_world
from trainer.episodes import EpisodeSettings, ObservationTracker

logger = logging.getLogger(__name__)

FLOW_HORIZON = 600.0


class Policy(Protocol):
    name: str

    def commands(self, world: WorldState) -> Dict[int, float]:
        ...


class AgentPolicy:
    """Greedy shared-policy agents, optionally behind the safety shield."""
    name = 'shared-d3qn'

    def __init__(self, agent_set: AgentSet, settings: EpisodeSettings, shield: Optional[SafetyShield] = None):
        self.agent_set = agent_set
        self.settings = settings
        self.shield = shield
        self.tracker = ObservationTracker(settings.frame_size, settings.frame_stack, settings.view_extent)

    def commands(self, world: WorldState) -> Dict[int, float]:
        observations = self.tracker.observe(world)
        commands = {}
        for vehicle in world.active_vehicles():
            agent = self.agent_set.for_intention(vehicle.intention)
            q_values, _, _ = forward(agent.online, observation_tensor(observations[vehicle.id]))
            commands[vehicle.id] = self.settings.speed_commands[greedy_action(q_values)]
        if self.shield is not None:
            commands = self.shield(world, commands)
        return commands


def run_rollout(world: WorldState, policy: Policy, max_steps: int,
                stop_on_collision: bool = False) -> Tuple[WorldState, TrajectoryRecorder]:
    """Step until the network is empty, max_steps is reached or, if asked, a collision happens."""
    recorder = TrajectoryRecorder()
    steps = 0
    while steps < max_steps and not world.is_empty():
        world = step_world(world, policy.commands(world))
        recorder.record(world)
        steps += 1
        if stop_on_collision and world.collided_now:
            break
    return world, recorder


def run_scenario_suite(make_policy, scenarios: List[ScenarioSpec], max_steps: int = 1000,
                       dt: float = DEFAULT_STEP_LENGTH) -> List[MetricsRecord]:
    """Every scenario once with a fresh policy; the episode stops at the first collision."""
    records = []
    for scenario in scenarios:
        world = spawn_scenario(scenario, dt, collision_mode='terminate')
        world, recorder = run_rollout(world, make_policy(), max_steps, stop_on_collision=True)
        records.extend(compute_metrics(recorder.rows, dt))
    return records


def run_continuous_flow(policy: Policy, seed: int, flow_rate: float = 600.0, horizon: float = FLOW_HORIZON,
                        dt: float = DEFAULT_STEP_LENGTH) -> Tuple[List[MetricsRecord], WorldState]:
    """Poisson traffic for `horizon` seconds; colliding vehicles leave the network and the run goes on."""
    spec = ArrivalProcess(flow_rate).generate(horizon, np.random.default_rng(seed), dt)
    world = spawn_scenario(spec, dt, collision_mode='remove')
    steps = int(round(horizon / dt))
    recorder = TrajectoryRecorder()
    for _ in range(steps):
        world = step_world(world, policy.commands(world))
        recorder.record(world)
    logger.debug(f'{policy.name}: {len(spec.spawns)} arrivals, {len(world.collision_events)} collisions '
                 f'in {horizon}s of traffic')
    return compute_metrics(recorder.rows, dt), world
