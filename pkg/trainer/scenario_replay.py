"""Prioritized scenario replay: harder training scenarios are sampled more often."""
import itertools
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec, four_way_scenario

logger = logging.getLogger(__name__)

SCENARIO_COUNT = len(Intention) ** len(Approach)
DEFAULT_SHIFT = 1.0
DEFAULT_FLOOR = 0.2 / SCENARIO_COUNT


@dataclass(frozen=True)
class ScenarioBank:
    scenarios: Tuple[ScenarioSpec, ...]
    probabilities: np.ndarray
    floor: float = DEFAULT_FLOOR

    def __len__(self):
        return len(self.scenarios)


def build_scenario_bank(floor: float = DEFAULT_FLOOR) -> ScenarioBank:
    """All 81 intention assignments of one vehicle per approach, uniformly weighted."""
    scenarios = tuple(four_way_scenario(intentions) for intentions in itertools.product(Intention, repeat=len(Approach)))
    probabilities = np.full(len(scenarios), 1.0 / len(scenarios))
    return ScenarioBank(scenarios, probabilities, floor)


def scenario_weights(returns: Sequence[float], shift: float = DEFAULT_SHIFT) -> np.ndarray:
    """w_i = 1 / (G_i - min G + shift)."""
    if shift <= 0:
        raise ValueError(f'Shift must be positive, got {shift}')
    returns = np.asarray(returns, dtype=np.float64)
    return 1.0 / (returns - returns.min() + shift)


def apply_floor(probabilities: np.ndarray, floor: float) -> np.ndarray:
    """Raise entries below `floor` to it and rescale the others so the vector still sums to one."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if floor * len(probabilities) > 1.0:
        raise ValueError(f'Floor {floor} is too large for {len(probabilities)} scenarios')
    fixed = np.zeros(len(probabilities), dtype=bool)
    while True:
        free = ~fixed
        free_mass = 1.0 - floor * fixed.sum()
        floored = np.where(fixed, floor, probabilities * free_mass / probabilities[free].sum())
        below = free & (floored < floor)
        if not below.any():
            return floored
        fixed |= below


def update_scenario_distribution(bank: ScenarioBank, returns: Sequence[float],
                                 shift: float = DEFAULT_SHIFT) -> ScenarioBank:
    if len(returns) != len(bank):
        raise ValueError(f'Expected {len(bank)} returns, got {len(returns)}')
    weights = scenario_weights(returns, shift)
    probabilities = apply_floor(weights / weights.sum(), bank.floor)
    logger.debug(f'scenario distribution was updated, max p={probabilities.max():.4f}, '
                 f'min p={probabilities.min():.4f}')
    return ScenarioBank(bank.scenarios, probabilities, bank.floor)


def sample_scenario_index(bank: ScenarioBank, rng: np.random.Generator) -> int:
    return int(rng.choice(len(bank), p=bank.probabilities))


def sample_scenario(bank: ScenarioBank, rng: np.random.Generator) -> ScenarioSpec:
    return bank.scenarios[sample_scenario_index(bank, rng)]
