"""Per-vehicle metrics from trajectory rows and their aggregation."""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from simulation.trajectory import TrajectoryParseError, TrajectoryRow
from simulation.world import DEFAULT_STEP_LENGTH
from trainer.rewards import is_stopped

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsRecord:
    vehicle_id: int
    travel_time: float
    waiting_time: float
    average_speed: float
    distance: float
    collided: bool
    censored: bool


@dataclass(frozen=True)
class MetricsSummary:
    vehicles: int
    completed: int
    collided: int
    censored: int
    collision_rate: float
    mean_travel_time: Optional[float]
    mean_waiting_time: Optional[float]
    mean_average_speed: Optional[float]
    std_travel_time: Optional[float]
    std_waiting_time: Optional[float]
    std_average_speed: Optional[float]


def compute_metrics(rows: Iterable[TrajectoryRow], dt: float = DEFAULT_STEP_LENGTH) -> List[MetricsRecord]:
    """One record per vehicle that entered the network, in order of first appearance.

    A vehicle still moving in its last recorded row is censored.
    """
    per_vehicle = OrderedDict()
    for row in rows:
        per_vehicle.setdefault(row.vehicle_id, []).append(row)

    records = []
    for vehicle_id, vehicle_rows in per_vehicle.items():
        vehicle_rows.sort(key=lambda row: row.step)
        steps = [row.step for row in vehicle_rows]
        if steps != list(range(steps[0], steps[0] + len(steps))):
            raise TrajectoryParseError(f'vehicle {vehicle_id}: steps are missing or duplicated')
        last = vehicle_rows[-1]
        travel_time = len(vehicle_rows) * dt
        waiting_time = sum(1 for row in vehicle_rows if is_stopped(row.speed)) * dt
        collided = any(row.collided for row in vehicle_rows)
        records.append(MetricsRecord(
            vehicle_id=vehicle_id,
            travel_time=travel_time,
            waiting_time=waiting_time,
            average_speed=last.s / travel_time,
            distance=last.s,
            collided=collided,
            censored=not last.done and not collided,
        ))
    censored = sum(record.censored for record in records)
    if censored:
        logger.warning(f'{censored} vehicles were still in the network at the end of the run')
    return records


def _mean_and_std(values: List[float]):
    if not values:
        return None, None
    return float(np.mean(values)), float(np.std(values))


def summarize_metrics(records: List[MetricsRecord]) -> MetricsSummary:
    """Time metrics exclude censored vehicles; the collision rate covers every vehicle that entered."""
    timed = [record for record in records if not record.censored]
    collided = sum(record.collided for record in records)
    travel = _mean_and_std([record.travel_time for record in timed])
    waiting = _mean_and_std([record.waiting_time for record in timed])
    speed = _mean_and_std([record.average_speed for record in timed])
    return MetricsSummary(
        vehicles=len(records),
        completed=sum(1 for record in timed if not record.collided),
        collided=collided,
        censored=len(records) - len(timed),
        collision_rate=collided / len(records) if records else 0.0,
        mean_travel_time=travel[0],
        mean_waiting_time=waiting[0],
        mean_average_speed=speed[0],
        std_travel_time=travel[1],
        std_waiting_time=waiting[1],
        std_average_speed=speed[1],
    )
