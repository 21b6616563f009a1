import argparse
import logging
import os

import numpy as np

from agents.d3qn import load_agent_set
from baselines.arrivals import ArrivalProcess
from baselines.policies import RandomPolicy, SignalPolicy
from harness.benchmark import AGENT_METHOD
from harness.rollouts import AgentPolicy, run_rollout
from harness.shield import SafetyShield
from simulation.observation import dump_frame, render_frame
from simulation.scenarios import read_scenario_file
from simulation.trajectory import write_trajectory_csv
from simulation.world import spawn_scenario
from trainer.training import checkpoint_dir, episode_settings
from utils.config_utils import TrainConfig

logger = logging.getLogger(__name__)


def dump_trajectory(args: argparse.Namespace, config: TrainConfig) -> None:
    """Run one method on a scenario file (or seeded Poisson traffic) and write the per-step trajectory CSV."""
    if args.scenario:
        spec = read_scenario_file(args.scenario)
        world = spawn_scenario(spec, config.step_length, collision_mode='terminate')
        max_steps = config.max_episode_steps
    else:
        spec = ArrivalProcess(args.flow).generate(args.horizon, np.random.default_rng(config.seed),
                                                  config.step_length)
        world = spawn_scenario(spec, config.step_length, collision_mode='remove')
        max_steps = int(round(args.horizon / config.step_length))

    if args.method == AGENT_METHOD:
        agent_set = load_agent_set(args.checkpoint or checkpoint_dir(args.checkpoints, config.seed),
                                   config.architecture())
        policy = AgentPolicy(agent_set, episode_settings(config), SafetyShield() if args.shield else None)
    elif args.method == 'random':
        policy = RandomPolicy(np.random.default_rng(config.seed), config.speed_commands)
    else:
        policy = SignalPolicy(args.method)

    if args.frames:
        os.makedirs(args.frames, exist_ok=True)
        for vehicle in world.active_vehicles():
            path = os.path.join(args.frames, f'vehicle-{vehicle.id}-step-0.frame')
            dump_frame(render_frame(world, vehicle.id, config.frame_size, config.view_extent), path)
        logger.info(f'first frames were dumped to {args.frames}')

    world, recorder = run_rollout(world, policy, max_steps, stop_on_collision=bool(args.scenario))
    write_trajectory_csv(recorder.rows, args.output)
    logger.info(f'{len(recorder.rows)} trajectory rows of {policy.name} were written to {args.output}, '
                f'{len(world.collision_events)} collisions')
