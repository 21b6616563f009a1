import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Protocol, Tuple

import numpy as np

from agents.d3qn import AgentSet, select_action
from agents.replay_buffer import Transition
from simulation.observation import (DEFAULT_FRAME_SIZE, DEFAULT_VIEW_EXTENT, FrameStack, push_frame, render_frame,
                                    reset_stack)
from simulation.trajectory import TrajectoryRecorder
from simulation.world import WorldState, step_world
from trainer.rewards import compute_reward, is_stopped

logger = logging.getLogger(__name__)

CommandFilter = Callable[[WorldState, Dict[int, float]], Dict[int, float]]


@dataclass(frozen=True)
class EpisodeSettings:
    max_steps: int = 1000
    frame_size: int = DEFAULT_FRAME_SIZE
    frame_stack: int = 3
    view_extent: float = DEFAULT_VIEW_EXTENT
    reward_weight: float = 1.0
    speed_commands: Tuple[float, ...] = (0.0, 15.0)


@dataclass
class EpisodeResult:
    steps: int = 0
    returns: Dict[int, float] = field(default_factory=dict)
    transitions: List[Transition] = field(default_factory=list)
    transition_count: int = 0
    collided: bool = False
    end_reason: str = 'empty'
    world: Optional[WorldState] = None

    @property
    def mean_return(self) -> float:
        """Mean undiscounted return over the vehicles that took part."""
        if not self.returns:
            return 0.0
        return float(np.mean(list(self.returns.values())))


class Learner(Protocol):
    """Training side of an episode: exploration rate and the per-step learning work."""
    epsilon: float

    def learn_step(self) -> bool:
        """Update after one world step; True once the step budget is spent."""


class ObservationTracker:
    """Frame stacks of the vehicles in the network, refreshed once per world state."""

    def __init__(self, frame_size: int = DEFAULT_FRAME_SIZE, frame_stack: int = 3,
                 view_extent: float = DEFAULT_VIEW_EXTENT):
        self.frame_size = frame_size
        self.frame_stack = frame_stack
        self.view_extent = view_extent
        self.stacks: Dict[int, FrameStack] = {}

    def observe(self, world: WorldState) -> Dict[int, FrameStack]:
        stacks = {}
        for vehicle in world.active_vehicles():
            frame = render_frame(world, vehicle.id, self.frame_size, self.view_extent)
            previous = self.stacks.get(vehicle.id)
            if previous is None:
                stacks[vehicle.id] = reset_stack(frame, self.frame_stack)
            else:
                stacks[vehicle.id] = push_frame(previous, frame)
        self.stacks = stacks
        return stacks


def run_episode(world: WorldState, agent_set: AgentSet, settings: EpisodeSettings, rng: np.random.Generator,
                learner: Optional[Learner] = None, recorder: Optional[TrajectoryRecorder] = None,
                command_filter: Optional[CommandFilter] = None, keep_transitions: bool = False) -> EpisodeResult:
    """Drive every vehicle with the agent of its turning intention until the episode ends.

    Without a learner the policy is greedy and nothing is stored. With one, transitions go to the
    agents' buffers and learner.learn_step() runs after every world step.
    The episode ends on a collision (terminate mode), when the network is empty, after
    settings.max_steps steps or when the learner's budget is spent.
    """
    result = EpisodeResult(world=world)
    tracker = ObservationTracker(settings.frame_size, settings.frame_stack, settings.view_extent)
    observations = tracker.observe(world)

    while not world.is_empty() and result.steps < settings.max_steps:
        epsilon = learner.epsilon if learner is not None else 0.0
        actions = {}
        commands = {}
        for vehicle in world.active_vehicles():
            agent = agent_set.for_intention(vehicle.intention)
            action = select_action(agent, observations[vehicle.id], epsilon, rng)
            actions[vehicle.id] = action
            commands[vehicle.id] = settings.speed_commands[action]
        if command_filter is not None:
            commands = command_filter(world, commands)

        next_world = step_world(world, commands)
        next_observations = tracker.observe(next_world)
        result.steps += 1
        if recorder is not None:
            recorder.record(next_world)

        for vehicle_id, action in actions.items():
            vehicle = next_world.vehicle(vehicle_id)
            collided = vehicle_id in next_world.collided_now
            completed = vehicle_id in next_world.completed
            reward = compute_reward(next_world.progress[vehicle_id], not is_stopped(vehicle.speed),
                                    collided, completed, settings.reward_weight)
            result.returns[vehicle_id] = result.returns.get(vehicle_id, 0.0) + reward
            if learner is None and not keep_transitions:
                continue
            terminal = collided or completed
            obs = observations[vehicle_id]
            transition = Transition(obs, action, reward, obs if terminal else next_observations[vehicle_id], terminal)
            if learner is not None:
                agent_set.for_intention(vehicle.intention).buffer.store(transition)
            if keep_transitions:
                result.transitions.append(transition)
            result.transition_count += 1

        world = next_world
        observations = next_observations
        if world.collided_now:
            result.collided = True
        if learner is not None and learner.learn_step():
            result.end_reason = 'budget'
            break
        if world.collided_now and world.collision_mode == 'terminate':
            result.end_reason = 'collision'
            break
    else:
        result.end_reason = 'empty' if world.is_empty() else 'max_steps'

    result.world = world
    logger.debug(f'episode ended after {result.steps} steps ({result.end_reason}), '
                 f'mean return {result.mean_return:.3f}')
    return result
