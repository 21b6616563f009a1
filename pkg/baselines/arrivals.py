import logging
import math
from dataclasses import dataclass

import numpy as np

from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec
from simulation.world import DEFAULT_STEP_LENGTH

logger = logging.getLogger(__name__)

EVALUATION_FLOW = 600.0


@dataclass(frozen=True)
class ArrivalProcess:
    """Poisson arrivals on every approach with uniformly drawn turning intentions."""
    flow_rate: float = EVALUATION_FLOW

    def __post_init__(self):
        if self.flow_rate < 0:
            raise ValueError(f'Flow rate must not be negative, got {self.flow_rate}')

    @property
    def approach_rate(self) -> float:
        """Vehicles per second on one approach."""
        return self.flow_rate / len(Approach) / 3600.0

    def generate(self, horizon: float, rng: np.random.Generator, dt: float = DEFAULT_STEP_LENGTH) -> ScenarioSpec:
        """Spawns in [0, horizon), snapped up to the step grid, at most one per approach and step."""
        spawns = []
        if self.approach_rate > 0:
            for approach in Approach:
                t = 0.0
                last_step = -1
                while True:
                    t += rng.exponential(1.0 / self.approach_rate)
                    step = max(math.ceil(round(t / dt, 9)), last_step + 1)
                    if step * dt >= horizon:
                        break
                    intention = Intention(int(rng.integers(len(Intention))))
                    spawns.append((approach, intention, round(step * dt, 9)))
                    last_step = step
        spawns.sort(key=lambda spawn: (spawn[2], spawn[0]))
        logger.debug(f'{len(spawns)} arrivals were drawn for {horizon}s at {self.flow_rate} veh/h')
        return ScenarioSpec(tuple(spawns))
