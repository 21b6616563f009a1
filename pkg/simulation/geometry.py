import bisect
import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from utils.geometry_utils import Point, rotate_cw, unit_vector

logger = logging.getLogger(__name__)

APPROACH_LENGTH = 100.0
EXIT_LENGTH = 50.0
LANE_WIDTH = 3.5
BOX_SIZE = 14.0
ARC_SAMPLING = 0.25
VEHICLE_LENGTH = 4.5
VEHICLE_WIDTH = 1.8


class Approach(enum.IntEnum):
    """Road a vehicle comes from. Clockwise order, so +1 is a 90 degree clockwise rotation."""
    N = 0
    E = 1
    S = 2
    W = 3

    def rotated(self, quarter_turns: int = 1) -> 'Approach':
        return Approach((self.value + quarter_turns) % 4)

    @classmethod
    def parse(cls, text: str) -> 'Approach':
        return cls[text.strip().upper()]


class Intention(enum.IntEnum):
    LEFT = 0
    STRAIGHT = 1
    RIGHT = 2

    @classmethod
    def parse(cls, text: str) -> 'Intention':
        return cls[text.strip().upper()]

    @property
    def label(self) -> str:
        return self.name.capitalize()


Route = Tuple[Approach, Intention]
ROUTES: Tuple[Route, ...] = tuple((approach, intention) for approach in Approach for intention in Intention)


def exit_road(approach: Approach, intention: Intention) -> Approach:
    """Road the route leaves the intersection on."""
    turn = {Intention.LEFT: 1, Intention.STRAIGHT: 2, Intention.RIGHT: 3}[intention]
    return approach.rotated(turn)


@dataclass(frozen=True, eq=False)
class Path:
    """Polyline of one route with cumulative arc length.

    stop_s and exit_s are the arc lengths where the path enters and leaves the intersection box.
    """
    xs: Tuple[float, ...]
    ys: Tuple[float, ...]
    cumulative: Tuple[float, ...]
    headings: Tuple[Tuple[float, float], ...]
    stop_s: float
    exit_s: float

    @property
    def length(self) -> float:
        return self.cumulative[-1]

    @property
    def points(self) -> List[Point]:
        return list(zip(self.xs, self.ys))

    def pose_at(self, s: float) -> Tuple[float, float, float, float]:
        """Position and unit heading (x, y, hx, hy) at arc length s, clamped to the path."""
        cumulative = self.cumulative
        if s <= 0.0:
            index = 0
            s = 0.0
        elif s >= cumulative[-1]:
            index = len(cumulative) - 2
            s = cumulative[-1]
        else:
            index = bisect.bisect_right(cumulative, s) - 1
        t = (s - cumulative[index]) / (cumulative[index + 1] - cumulative[index])
        x0, y0 = self.xs[index], self.ys[index]
        x = x0 + t * (self.xs[index + 1] - x0)
        y = y0 + t * (self.ys[index + 1] - y0)
        hx, hy = self.headings[index]
        return x, y, hx, hy

    def rotated(self) -> 'Path':
        points = [rotate_cw(point) for point in self.points]
        return make_path(points, self.stop_s, self.exit_s)


def make_path(points: List[Point], stop_s: float, exit_s: float) -> Path:
    xs = tuple(point[0] for point in points)
    ys = tuple(point[1] for point in points)
    cumulative = [0.0]
    headings = []
    for index in range(len(points) - 1):
        dx = xs[index + 1] - xs[index]
        dy = ys[index + 1] - ys[index]
        segment = math.sqrt(dx * dx + dy * dy)
        if segment <= 0.0:
            raise ValueError('Path has a zero-length segment')
        cumulative.append(cumulative[-1] + segment)
        headings.append(unit_vector(dx, dy))
    return Path(xs, ys, tuple(cumulative), tuple(headings), stop_s, exit_s)


def _arc_points(center: Point, radius: float, start_angle: float, end_angle: float,
                start: Point, end: Point) -> List[Point]:
    """Arc samples spaced at most ARC_SAMPLING apart, with exact endpoints."""
    arc_length = abs(end_angle - start_angle) * radius
    samples = max(2, math.ceil(arc_length / ARC_SAMPLING))
    points = [start]
    for index in range(1, samples):
        angle = start_angle + (end_angle - start_angle) * index / samples
        points.append((center[0] + radius * math.cos(angle), center[1] + radius * math.sin(angle)))
    points.append(end)
    return points


@dataclass(frozen=True)
class IntersectionGeometry:
    approach_length: float = APPROACH_LENGTH
    lane_width: float = LANE_WIDTH
    stop_line_offset: float = BOX_SIZE / 2
    exit_length: float = EXIT_LENGTH
    vehicle_length: float = VEHICLE_LENGTH
    vehicle_width: float = VEHICLE_WIDTH
    route_paths: Dict[Route, Path] = field(default_factory=dict, compare=False, repr=False)

    @property
    def road_extent(self) -> float:
        """Distance from the center to the far end of every road."""
        return self.stop_line_offset + self.approach_length


def _north_paths(geometry: IntersectionGeometry) -> Dict[Intention, Path]:
    """Paths of a vehicle coming from the north (driving south, right-hand traffic)."""
    half_lane = geometry.lane_width / 2
    box = geometry.stop_line_offset
    spawn = (-half_lane, box + geometry.approach_length)
    entry = (-half_lane, box)
    stop_s = geometry.approach_length

    straight_exit = (-half_lane, -box)
    straight = make_path(
        [spawn, entry, straight_exit, (-half_lane, -box - geometry.exit_length)],
        stop_s, stop_s + 2 * box,
    )

    right_radius = box - half_lane
    right_arc = _arc_points((-box, box), right_radius, 0.0, -math.pi / 2, entry, (-box, half_lane))
    right_points = [spawn] + right_arc + [(-box - geometry.exit_length, half_lane)]
    right = make_path(right_points, stop_s, 0.0)

    left_radius = box + half_lane
    left_arc = _arc_points((box, box), left_radius, math.pi, 1.5 * math.pi, entry, (box, -half_lane))
    left_points = [spawn] + left_arc + [(box + geometry.exit_length, -half_lane)]
    left = make_path(left_points, stop_s, 0.0)

    paths = {Intention.STRAIGHT: straight}
    for intention, path, arc in ((Intention.RIGHT, right, right_arc), (Intention.LEFT, left, left_arc)):
        exit_s = path.cumulative[len(arc)]
        paths[intention] = Path(path.xs, path.ys, path.cumulative, path.headings, stop_s, exit_s)
    return paths


def build_geometry(**params) -> IntersectionGeometry:
    """Build the 12 route paths; other approaches are exact 90 degree rotations of the north ones."""
    geometry = IntersectionGeometry(**params)
    paths = _north_paths(geometry)
    for intention, path in paths.items():
        current = path
        for approach in Approach:
            geometry.route_paths[(approach, intention)] = current
            current = current.rotated()
    logger.debug(f'intersection geometry was built, {len(geometry.route_paths)} routes')
    return geometry


@functools.lru_cache(maxsize=None)
def get_geometry() -> IntersectionGeometry:
    return build_geometry()


def route_path(approach: Approach, intention: Intention,
               geometry: Optional[IntersectionGeometry] = None) -> Path:
    geometry = geometry or get_geometry()
    return geometry.route_paths[(Approach(approach), Intention(intention))]
