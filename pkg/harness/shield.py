"""Optional rule-based safety layer for learned policies at evaluation time."""
import logging
import math
from typing import Dict, List

from simulation.world import MAX_SPEED, VehicleState, WorldState, step_vehicle, vehicle_corners
from utils.geometry_utils import rectangles_collide

logger = logging.getLogger(__name__)

LOOKAHEAD_STEPS = 10


class SafetyShield:
    """Turns a "go" command into "stop" when the go look-ahead of a vehicle hits another vehicle's look-ahead.

    Other vehicles are predicted with their own commands; vehicles are checked in id order and an
    override is visible to the vehicles checked after it.
    """

    def __init__(self, lookahead_steps: int = LOOKAHEAD_STEPS):
        self.lookahead_steps = lookahead_steps
        self.overrides = 0

    def _predict(self, vehicle: VehicleState, command: float, world: WorldState) -> List:
        corners = []
        for _ in range(self.lookahead_steps):
            if vehicle.done:
                break
            vehicle = step_vehicle(vehicle, command, world.dt, world.geometry)
            corners.append(None if vehicle.done else vehicle_corners(vehicle, world.geometry))
        return corners

    def __call__(self, world: WorldState, commands: Dict[int, float]) -> Dict[int, float]:
        commands = dict(commands)
        vehicles = sorted(world.active_vehicles(), key=lambda vehicle: vehicle.id)
        reach = 2 * MAX_SPEED * self.lookahead_steps * world.dt + 2 * world.geometry.vehicle_length
        poses = {vehicle.id: vehicle_corners(vehicle, world.geometry)[0] for vehicle in vehicles}
        for ego in vehicles:
            if commands[ego.id] <= 0.0:
                continue
            ego_future = self._predict(ego, commands[ego.id], world)
            ex, ey = poses[ego.id]
            for other in vehicles:
                if other.id == ego.id:
                    continue
                ox, oy = poses[other.id]
                if math.hypot(ex - ox, ey - oy) > reach:
                    continue
                other_future = self._predict(other, commands[other.id], world)
                if any(a is not None and b is not None and rectangles_collide(a, b)
                       for a, b in zip(ego_future, other_future)):
                    commands[ego.id] = 0.0
                    self.overrides += 1
                    break
        return commands
