import csv
import logging
from dataclasses import astuple, dataclass
from typing import Iterable, List

from simulation.geometry import Approach, Intention
from simulation.world import WorldState

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ('step', 'vehicle_id', 'approach', 'intention', 's', 'speed', 'collided', 'done')


class TrajectoryParseError(ValueError):
    pass


@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    vehicle_id: int
    approach: Approach
    intention: Intention
    s: float
    speed: float
    collided: bool
    done: bool


def rows_for_step(world: WorldState) -> List[TrajectoryRow]:
    """Rows of every vehicle that moved in the step producing `world`."""
    return [
        TrajectoryRow(world.time_step_index, vehicle.id, vehicle.approach, vehicle.intention,
                      vehicle.s, vehicle.speed, vehicle.collided, vehicle.done)
        for vehicle in world.vehicles
        if vehicle.id in world.progress
    ]


class TrajectoryRecorder:
    def __init__(self):
        self.rows: List[TrajectoryRow] = []

    def record(self, world: WorldState) -> None:
        self.rows.extend(rows_for_step(world))


def write_trajectory_csv(rows: Iterable[TrajectoryRow], path) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        count = 0
        for row in rows:
            step, vehicle_id, approach, intention, s, speed, collided, done = astuple(row)
            writer.writerow([step, vehicle_id, Approach(approach).name, Intention(intention).label,
                             repr(float(s)), repr(float(speed)), int(collided), int(done)])
            count += 1
    logger.debug(f'{count} trajectory rows were written to {path}')


def _parse_flag(value: str) -> bool:
    if value not in ('0', '1'):
        raise ValueError(f'flag must be 0 or 1, got {value!r}')
    return value == '1'


def parse_trajectory_lines(lines: Iterable[str]) -> List[TrajectoryRow]:
    reader = csv.reader(lines)
    rows = []
    header = next(reader, None)
    if header is None or tuple(header) != TRAJECTORY_COLUMNS:
        raise TrajectoryParseError(f'line 1: expected header {",".join(TRAJECTORY_COLUMNS)}')
    for line_number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(TRAJECTORY_COLUMNS):
            raise TrajectoryParseError(f'line {line_number}: expected {len(TRAJECTORY_COLUMNS)} fields')
        try:
            rows.append(TrajectoryRow(
                int(fields[0]), int(fields[1]), Approach.parse(fields[2]), Intention.parse(fields[3]),
                float(fields[4]), float(fields[5]), _parse_flag(fields[6]), _parse_flag(fields[7]),
            ))
        except (KeyError, ValueError) as e:
            raise TrajectoryParseError(f'line {line_number}: {e}')
    return rows


def read_trajectory_csv(path) -> List[TrajectoryRow]:
    with open(path, newline='') as f:
        return parse_trajectory_lines(f)
