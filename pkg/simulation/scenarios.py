import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from simulation.geometry import Approach, Intention
from simulation.world import ScenarioValidationError, validate_scenario

logger = logging.getLogger(__name__)

Spawn = Tuple[Approach, Intention, float]


@dataclass(frozen=True)
class ScenarioSpec:
    spawns: Tuple[Spawn, ...] = ()

    def __post_init__(self):
        normalized = tuple((Approach(a), Intention(i), float(t)) for a, i, t in self.spawns)
        object.__setattr__(self, 'spawns', normalized)

    @property
    def label(self) -> str:
        return ' '.join(f'{approach.name}:{intention.label}@{spawn_time:g}'
                        for approach, intention, spawn_time in self.spawns)


def four_way_scenario(intentions: Sequence[Intention]) -> ScenarioSpec:
    """Training scenario: one vehicle per approach (N, E, S, W order), all at t=0."""
    if len(intentions) != len(Approach):
        raise ScenarioValidationError(f'Expected {len(Approach)} intentions, got {len(intentions)}')
    return ScenarioSpec(tuple((approach, Intention(intention), 0.0)
                              for approach, intention in zip(Approach, intentions)))


def parse_scenario_lines(lines: Iterable[str]) -> ScenarioSpec:
    """One spawn per line: `approach intention spawn_time`, commas allowed, `#` starts a comment."""
    spawns = []
    for line_number, raw_line in enumerate(lines, start=1):
        line = raw_line.split('#', 1)[0].replace(',', ' ').strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ScenarioValidationError(f'line {line_number}: expected 3 fields, got {len(parts)}')
        try:
            spawns.append((Approach.parse(parts[0]), Intention.parse(parts[1]), float(parts[2])))
        except (KeyError, ValueError):
            raise ScenarioValidationError(f'line {line_number}: cannot parse "{raw_line.strip()}"')
    spec = ScenarioSpec(tuple(spawns))
    validate_scenario(spec)
    return spec


def read_scenario_file(path) -> ScenarioSpec:
    with open(path) as f:
        spec = parse_scenario_lines(f)
    logger.debug(f'scenario with {len(spec.spawns)} spawns was read from {path}')
    return spec


def write_scenario_file(spec: ScenarioSpec, path) -> None:
    with open(path, 'w') as f:
        f.write('# approach intention spawn_time\n')
        for approach, intention, spawn_time in spec.spawns:
            f.write(f'{approach.name} {intention.label} {spawn_time!r}\n')
