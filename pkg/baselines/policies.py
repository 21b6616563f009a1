import logging
from typing import Any, Dict, Sequence

import numpy as np

from baselines.car_following import signal_commands
from baselines.signals import PLANS, make_controller
from simulation.world import WorldState

logger = logging.getLogger(__name__)

SPEED_COMMANDS = (0.0, 15.0)


def random_policy(obs: Any, rng: np.random.Generator, actions: int = len(SPEED_COMMANDS)) -> int:
    """Uniform action index; the observation is ignored."""
    return int(rng.integers(actions))


class RandomPolicy:
    name = 'random'

    def __init__(self, rng: np.random.Generator, speed_commands: Sequence[float] = SPEED_COMMANDS):
        self.rng = rng
        self.speed_commands = tuple(speed_commands)

    def commands(self, world: WorldState) -> Dict[int, float]:
        return {
            vehicle.id: self.speed_commands[random_policy(None, self.rng, len(self.speed_commands))]
            for vehicle in world.active_vehicles()
        }


class SignalPolicy:
    """Traffic light plan plus the signal-obeying driver model."""

    def __init__(self, plan_name: str):
        if plan_name not in PLANS:
            raise KeyError(f'Unknown signal plan {plan_name}')
        self.name = plan_name
        self.controller = make_controller(plan_name)
        self.signal = None

    def commands(self, world: WorldState) -> Dict[int, float]:
        self.signal = self.controller.update(world)
        return signal_commands(world, self.signal)
