"""Signal-obeying driver model used under the traffic-light baselines.

Commands are bang-bang (0 or 15 m/s). A vehicle keeps going only if, after one more accelerating step,
it can still brake to a stop before every obstacle ahead: its leader, and the stop line when the light or
the junction tells it to wait. Junction rules: a vehicle waiting to enter yields to every conflicting
vehicle that is already committed to the box and has not cleared the conflict zone; within one signal
group the lower-priority movement (left turns, then approach order) also yields when the other vehicle
heads its queue and could reach the conflict zone before it clears it. Priority is a strict order over
routes and only queue heads take part in it, so waiting vehicles never form a cycle.
"""
import functools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from baselines.signals import Phase, SignalState, group_of
from simulation.geometry import ROUTES, IntersectionGeometry, Intention, Route, exit_road, get_geometry, route_path
from simulation.world import MAX_ACCEL, MAX_DECEL, MAX_SPEED, VehicleState, WorldState, next_speed
from utils.geometry_utils import rectangle_corners, rectangles_overlap_matrix

logger = logging.getLogger(__name__)

MIN_GAP = 2.5
TIME_HEADWAY = 1.0
STOP_LINE_MARGIN = 0.5
YIELD_MARGIN = 1.0
# only vehicles this close to their stop line evaluate the junction rules
GATE_DISTANCE = 40.0
CONFLICT_SAMPLING = 0.25
CONFLICT_LENGTH_MARGIN = 1.0
CONFLICT_WIDTH_MARGIN = 0.6


@dataclass(frozen=True)
class ConflictZone:
    """Arc-length ranges on both routes where their bodies can overlap."""
    ego_start: float
    ego_end: float
    other_start: float
    other_end: float


def braking_distance(speed: float, dt: float) -> float:
    """Distance covered while braking to a stop with the simulator's rate limiter."""
    distance = 0.0
    while speed > 0.0:
        slower = max(0.0, speed - MAX_DECEL * dt)
        distance += (speed + slower) / 2 * dt
        speed = slower
    return distance


def go_is_safe(speed: float, obstacle: float, dt: float) -> bool:
    """After one step at full acceleration, can the vehicle still stop within `obstacle` meters."""
    faster = next_speed(speed, MAX_SPEED, dt)
    travel = (speed + faster) / 2 * dt
    return travel + braking_distance(faster, dt) <= obstacle


def time_to_cover(distance: float, speed: float) -> float:
    """Time to drive `distance` meters accelerating at full rate from `speed` up to the speed limit."""
    if distance <= 0:
        return 0.0
    ramp_time = (MAX_SPEED - speed) / MAX_ACCEL
    ramp_distance = speed * ramp_time + MAX_ACCEL * ramp_time ** 2 / 2
    if distance >= ramp_distance:
        return ramp_time + (distance - ramp_distance) / MAX_SPEED
    return (-speed + np.sqrt(speed ** 2 + 2 * MAX_ACCEL * distance)) / MAX_ACCEL


def car_follow_command(vehicle: VehicleState, leader_gap: Optional[float], signal: SignalState,
                       dist_to_stopline: Optional[float], leader_speed: float = 0.0, must_yield: bool = False,
                       dt: float = 0.1) -> float:
    """
    Speed command of one vehicle under signal control.
    :param vehicle: the controlled vehicle
    :param leader_gap: bumper-to-bumper distance to the vehicle ahead, None without one
    :param signal: current signal state
    :param dist_to_stopline: meters from the front bumper to the stop line, None once past it
    :param leader_speed: speed of the vehicle ahead
    :param must_yield: the junction rules ask the vehicle to wait at the stop line
    :return: 0 or 15 m/s
    """
    speed = vehicle.speed
    if leader_gap is not None:
        obstacle = leader_gap - MIN_GAP + braking_distance(leader_speed, dt)
        if not go_is_safe(speed, obstacle, dt):
            return 0.0
        faster = next_speed(speed, MAX_SPEED, dt)
        if leader_gap - (speed + faster) / 2 * dt < MIN_GAP + TIME_HEADWAY * faster:
            return 0.0
    if dist_to_stopline is not None and dist_to_stopline >= 0:
        phase = signal.phase_for(vehicle.approach)
        can_stop = braking_distance(speed, dt) <= dist_to_stopline
        wait = phase is Phase.RED or (phase is Phase.YELLOW and can_stop) or (must_yield and can_stop)
        if wait and not go_is_safe(speed, dist_to_stopline, dt):
            return 0.0
    return MAX_SPEED


def _sample_route(route: Route, geometry: IntersectionGeometry) -> Tuple[np.ndarray, np.ndarray]:
    path = route_path(route[0], route[1], geometry)
    start = max(0.0, path.stop_s - geometry.vehicle_length)
    end = min(path.length, path.exit_s + geometry.vehicle_length)
    positions = np.arange(start, end + CONFLICT_SAMPLING / 2, CONFLICT_SAMPLING)
    corners = np.array([
        rectangle_corners(*path.pose_at(s), geometry.vehicle_length + CONFLICT_LENGTH_MARGIN,
                          geometry.vehicle_width + CONFLICT_WIDTH_MARGIN)
        for s in positions
    ])
    return positions, corners


@functools.lru_cache(maxsize=None)
def conflict_zone(ego_route: Route, other_route: Route,
                  geometry: Optional[IntersectionGeometry] = None) -> Optional[ConflictZone]:
    """Where two routes can collide inside the junction; None when they never do."""
    geometry = geometry or get_geometry()
    ego_positions, ego_corners = _sample_route(ego_route, geometry)
    other_positions, other_corners = _sample_route(other_route, geometry)
    overlaps = rectangles_overlap_matrix(ego_corners, other_corners)
    if not overlaps.any():
        return None
    ego_hits = ego_positions[overlaps.any(axis=1)]
    other_hits = other_positions[overlaps.any(axis=0)]
    return ConflictZone(float(ego_hits.min()), float(ego_hits.max() + CONFLICT_SAMPLING),
                        float(other_hits.min()), float(other_hits.max() + CONFLICT_SAMPLING))


def conflict_table(geometry: Optional[IntersectionGeometry] = None) -> Dict[Tuple[Route, Route], ConflictZone]:
    table = {}
    for ego_route in ROUTES:
        for other_route in ROUTES:
            zone = conflict_zone(ego_route, other_route, geometry)
            if zone is not None:
                table[(ego_route, other_route)] = zone
    return table


def _priority(route: Route) -> Tuple[bool, int]:
    """Smaller is higher: through and right movements before left turns, then approach order."""
    return route[1] == Intention.LEFT, int(route[0])


class JunctionView:
    """Per-step facts about every active vehicle that the driver model needs."""

    def __init__(self, world: WorldState):
        self.world = world
        self.geometry = world.geometry
        self.vehicles = world.active_vehicles()
        self.paths = {vehicle.id: route_path(vehicle.approach, vehicle.intention, self.geometry)
                      for vehicle in self.vehicles}
        self.exits = {vehicle.id: exit_road(vehicle.approach, vehicle.intention) for vehicle in self.vehicles}
        self.stopline_distance = {
            vehicle.id: self.paths[vehicle.id].stop_s - STOP_LINE_MARGIN - (vehicle.s + vehicle.length / 2)
            for vehicle in self.vehicles
        }
        self.committed = {
            vehicle.id: (self.stopline_distance[vehicle.id] < 0
                         or braking_distance(vehicle.speed, world.dt) > self.stopline_distance[vehicle.id])
            for vehicle in self.vehicles
        }
        # first uncommitted vehicle of every approach; the single lane holds the rest behind it
        self.queue_heads = {}
        for vehicle in self.vehicles:
            if self.committed[vehicle.id]:
                continue
            head = self.queue_heads.get(vehicle.approach)
            if head is None or vehicle.s > head.s:
                self.queue_heads[vehicle.approach] = vehicle

    def heads_queue(self, vehicle: VehicleState) -> bool:
        head = self.queue_heads.get(vehicle.approach)
        return head is not None and head.id == vehicle.id

    def zone(self, ego: VehicleState, other: VehicleState) -> Optional[ConflictZone]:
        if ego.route == other.route:
            return None
        return conflict_zone(ego.route, other.route, self.geometry)

    def leader(self, ego: VehicleState) -> Tuple[Optional[float], float]:
        """Gap to and speed of the closest vehicle ahead on the approach or on the exit road."""
        best_gap = None
        best_obstacle = None
        best_speed = 0.0
        ego_path = self.paths[ego.id]
        ego_exit = self.exits[ego.id]
        for other in self.vehicles:
            if other.id == ego.id:
                continue
            gap = None
            if other.approach == ego.approach and other.s > ego.s:
                zone = self.zone(other, ego)
                if other.route == ego.route or zone is not None and other.s <= zone.ego_end:
                    gap = other.s - ego.s - (other.length + ego.length) / 2
            if self.exits[other.id] == ego_exit:
                other_exit = other.s - self.paths[other.id].exit_s
                ego_exit_position = ego.s - ego_path.exit_s
                if other_exit >= 0 and other_exit > ego_exit_position:
                    exit_gap = other_exit - ego_exit_position - (other.length + ego.length) / 2
                    gap = exit_gap if gap is None else min(gap, exit_gap)
            if gap is None:
                continue
            obstacle = gap + braking_distance(other.speed, self.world.dt)
            if best_obstacle is None or obstacle < best_obstacle:
                best_gap, best_obstacle, best_speed = gap, obstacle, other.speed
        return best_gap, best_speed

    def must_yield(self, ego: VehicleState) -> bool:
        if self.committed[ego.id] or self.stopline_distance[ego.id] > GATE_DISTANCE:
            return False
        for other in self.vehicles:
            if other.id == ego.id:
                continue
            zone = self.zone(ego, other)
            if zone is None or other.s > zone.other_end:
                continue
            if self.committed[other.id]:
                return True
            same_group = group_of(other.approach) is group_of(ego.approach)
            if not same_group or other.approach == ego.approach or _priority(other.route) > _priority(ego.route):
                continue
            # a queued vehicle cannot reach the zone before its queue head moves
            if not self.heads_queue(other):
                continue
            arrival = max(0.0, zone.other_start - other.s) / MAX_SPEED
            clearing = time_to_cover(zone.ego_end - ego.s, ego.speed)
            if arrival < clearing + YIELD_MARGIN:
                return True
        return False


def signal_commands(world: WorldState, signal: SignalState) -> Dict[int, float]:
    """Commands for every active vehicle driving under the given signal state."""
    view = JunctionView(world)
    commands = {}
    for vehicle in view.vehicles:
        gap, leader_speed = view.leader(vehicle)
        distance = view.stopline_distance[vehicle.id]
        commands[vehicle.id] = car_follow_command(
            vehicle, gap, signal, None if distance < 0 else distance, leader_speed,
            view.must_yield(vehicle), world.dt,
        )
    return commands
