import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from simulation.geometry import Approach, IntersectionGeometry, Intention, Route, get_geometry, route_path
from utils.geometry_utils import rectangle_corners, rectangles_collide

logger = logging.getLogger(__name__)

DEFAULT_STEP_LENGTH = 0.1
MAX_ACCEL = 2.6
MAX_DECEL = 4.5
MAX_SPEED = 15.0
# entry must be this far clear (beyond one vehicle length) before a queued spawn is inserted
INSERTION_GAP = 2.5

COLLISION_MODES = ('terminate', 'remove')

Pose = Tuple[float, float, float, float]


class ContractViolationError(RuntimeError):
    pass


class ScenarioValidationError(ValueError):
    pass


@dataclass(frozen=True)
class VehicleState:
    id: int
    route: Route
    s: float = 0.0
    speed: float = 0.0
    commanded_speed: float = 0.0
    length: float = 4.5
    width: float = 1.8
    done: bool = False
    collided: bool = False
    spawn_step: int = 0

    @property
    def approach(self) -> Approach:
        return self.route[0]

    @property
    def intention(self) -> Intention:
        return self.route[1]


@dataclass(frozen=True)
class PendingSpawn:
    spawn_time: float
    approach: Approach
    intention: Intention
    vehicle_id: int


@dataclass(frozen=True)
class WorldState:
    """Snapshot of the intersection after `time_step_index` steps.

    progress, completed and collided_now describe the step that produced this snapshot.
    """
    time_step_index: int = 0
    dt: float = DEFAULT_STEP_LENGTH
    vehicles: Tuple[VehicleState, ...] = ()
    collision_events: Tuple[Tuple[int, int, int], ...] = ()
    pending: Tuple[PendingSpawn, ...] = ()
    progress: Mapping[int, float] = field(default_factory=dict)
    completed: FrozenSet[int] = frozenset()
    collided_now: FrozenSet[int] = frozenset()
    collision_mode: str = 'terminate'
    geometry: IntersectionGeometry = field(default_factory=get_geometry, repr=False, compare=False)

    @property
    def time(self) -> float:
        return self.time_step_index * self.dt

    def active_vehicles(self) -> List[VehicleState]:
        return [vehicle for vehicle in self.vehicles if not vehicle.done]

    def vehicle(self, vehicle_id: int) -> Optional[VehicleState]:
        for vehicle in self.vehicles:
            if vehicle.id == vehicle_id:
                return vehicle
        return None

    def is_empty(self) -> bool:
        """No vehicle left in the network and none waiting to enter."""
        return not self.pending and not self.active_vehicles()


def vehicle_pose(vehicle: VehicleState, geometry: Optional[IntersectionGeometry] = None):
    return route_path(vehicle.route[0], vehicle.route[1], geometry).pose_at(vehicle.s)


def vehicle_corners(vehicle: VehicleState, geometry: Optional[IntersectionGeometry] = None):
    x, y, hx, hy = vehicle_pose(vehicle, geometry)
    return rectangle_corners(x, y, hx, hy, vehicle.length, vehicle.width)


def next_speed(speed: float, command: float, dt: float) -> float:
    """Rate-limited speed controller."""
    if command > speed:
        return min(command, speed + MAX_ACCEL * dt)
    return max(command, speed - MAX_DECEL * dt)


def _advance(vehicle: VehicleState, command: float, dt: float, path_length: float) -> VehicleState:
    if not 0.0 <= command <= MAX_SPEED:
        raise ContractViolationError(f'Speed command {command} is outside [0, {MAX_SPEED}]')
    speed = next_speed(vehicle.speed, command, dt)
    s = min(vehicle.s + (vehicle.speed + speed) / 2 * dt, path_length)
    return VehicleState(
        vehicle.id, vehicle.route, s, speed, command, vehicle.length, vehicle.width,
        s >= path_length, vehicle.collided, vehicle.spawn_step,
    )


def step_vehicle(vehicle: VehicleState, command: float, dt: float,
                 geometry: Optional[IntersectionGeometry] = None) -> VehicleState:
    if dt <= 0:
        raise ContractViolationError(f'Step length must be positive, got {dt}')
    return _advance(vehicle, command, dt, route_path(vehicle.route[0], vehicle.route[1], geometry).length)


def _colliding_pairs(active: List[VehicleState], poses: List[Pose]) -> List[Tuple[int, int]]:
    """Bounding-circle prefilter, then the separating axis test on the remaining pairs."""
    radii = [math.hypot(vehicle.length, vehicle.width) / 2 for vehicle in active]
    pairs = []
    for i in range(len(active)):
        xi, yi, hxi, hyi = poses[i]
        ri = radii[i]
        corners_i = None
        for j in range(i + 1, len(active)):
            xj, yj, hxj, hyj = poses[j]
            reach = ri + radii[j]
            dx = xi - xj
            dy = yi - yj
            if dx * dx + dy * dy > reach * reach:
                continue
            first, second = active[i], active[j]
            if corners_i is None:
                corners_i = rectangle_corners(xi, yi, hxi, hyi, first.length, first.width)
            corners_j = rectangle_corners(xj, yj, hxj, hyj, second.length, second.width)
            if rectangles_collide(corners_i, corners_j):
                pairs.append((min(first.id, second.id), max(first.id, second.id)))
    return sorted(pairs)


def detect_collisions(world: WorldState) -> List[Tuple[int, int]]:
    """Pairs (smaller id, larger id) of active vehicles whose rectangles overlap."""
    active = world.active_vehicles()
    if len(active) < 2:
        return []
    return _colliding_pairs(active, [vehicle_pose(vehicle, world.geometry) for vehicle in active])


def _flag_collisions(vehicles: List[VehicleState], pairs: List[Tuple[int, int]], remove: bool) -> FrozenSet[int]:
    """Mark colliding vehicles in place; in `remove` mode they also leave the network."""
    hit = frozenset(vehicle_id for pair in pairs for vehicle_id in pair)
    for index, vehicle in enumerate(vehicles):
        if vehicle.id in hit:
            vehicles[index] = VehicleState(
                vehicle.id, vehicle.route, vehicle.s, vehicle.speed, vehicle.commanded_speed,
                vehicle.length, vehicle.width, vehicle.done or remove, True, vehicle.spawn_step,
            )
    return hit


def _entry_is_clear(vehicles: List[VehicleState], approach: Approach, geometry: IntersectionGeometry) -> bool:
    clearance = geometry.vehicle_length + INSERTION_GAP
    for vehicle in vehicles:
        if not vehicle.done and vehicle.route[0] == approach and vehicle.s < clearance:
            return False
    return True


def _insert_due_spawns(vehicles: List[VehicleState], pending: Tuple[PendingSpawn, ...], time: float,
                       step_index: int, geometry: IntersectionGeometry) -> Tuple[PendingSpawn, ...]:
    """Move due pending spawns into `vehicles`; blocked approaches keep their FIFO order."""
    waiting = []
    blocked = set()
    for spawn in pending:
        due = spawn.spawn_time <= time + 1e-9
        if not due or spawn.approach in blocked or not _entry_is_clear(vehicles, spawn.approach, geometry):
            if due:
                blocked.add(spawn.approach)
            waiting.append(spawn)
            continue
        vehicles.append(VehicleState(
            spawn.vehicle_id, (spawn.approach, spawn.intention),
            length=geometry.vehicle_length, width=geometry.vehicle_width, spawn_step=step_index,
        ))
    return tuple(waiting)


def validate_scenario(spec) -> None:
    seen = set()
    for approach, intention, spawn_time in spec.spawns:
        if spawn_time < 0:
            raise ScenarioValidationError(f'Negative spawn time {spawn_time} for {approach.name}')
        key = (Approach(approach), round(float(spawn_time), 9))
        if key in seen:
            raise ScenarioValidationError(f'Two spawns share approach {approach.name} at t={spawn_time}')
        seen.add(key)


def spawn_scenario(spec, dt: float = DEFAULT_STEP_LENGTH, collision_mode: str = 'terminate',
                   geometry: Optional[IntersectionGeometry] = None) -> WorldState:
    """World at time 0; spawns due at t=0 are placed at their route start, later ones are queued."""
    validate_scenario(spec)
    if collision_mode not in COLLISION_MODES:
        raise ScenarioValidationError(f'Unknown collision mode {collision_mode}')
    geometry = geometry or get_geometry()
    ordered = sorted(spec.spawns, key=lambda spawn: (spawn[2], Approach(spawn[0])))
    pending = tuple(
        PendingSpawn(float(spawn_time), Approach(approach), Intention(intention), vehicle_id)
        for vehicle_id, (approach, intention, spawn_time) in enumerate(ordered)
    )
    vehicles: List[VehicleState] = []
    pending = _insert_due_spawns(vehicles, pending, 0.0, 0, geometry)
    logger.debug(f'world was spawned: {len(vehicles)} vehicles placed, {len(pending)} queued')
    return WorldState(0, dt, tuple(vehicles), (), pending, {}, frozenset(), frozenset(), collision_mode, geometry)


def step_world(world: WorldState, commands: Mapping[int, float]) -> WorldState:
    """Advance every active vehicle one step, record collisions and insert due spawns."""
    dt = world.dt
    if dt <= 0:
        raise ContractViolationError(f'Step length must be positive, got {dt}')
    paths = world.geometry.route_paths
    vehicles = []
    active = []
    poses = []
    progress: Dict[int, float] = {}
    completed = set()
    for vehicle in world.vehicles:
        if vehicle.done:
            continue
        command = commands.get(vehicle.id)
        if command is None:
            raise ContractViolationError(f'No command for active vehicle {vehicle.id}')
        path = paths[vehicle.route]
        stepped = _advance(vehicle, command, dt, path.length)
        progress[vehicle.id] = stepped.s - vehicle.s
        if stepped.done:
            completed.add(vehicle.id)
        else:
            active.append(stepped)
            poses.append(path.pose_at(stepped.s))
        vehicles.append(stepped)

    step_index = world.time_step_index + 1
    events = world.collision_events
    hit = frozenset()
    pairs = _colliding_pairs(active, poses) if len(active) > 1 else []
    if pairs:
        hit = _flag_collisions(vehicles, pairs, world.collision_mode == 'remove')
        events = events + tuple((a, b, step_index) for a, b in pairs)
        logger.debug(f'collision at step {step_index}: {pairs}')

    pending = world.pending
    if pending:
        pending = _insert_due_spawns(vehicles, pending, step_index * dt, step_index, world.geometry)
    return WorldState(
        step_index, dt, tuple(vehicles), events, pending, progress,
        frozenset(completed), hit, world.collision_mode, world.geometry,
    )
