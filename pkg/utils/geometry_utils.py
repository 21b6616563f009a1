from typing import Sequence, Tuple
import math

import numpy as np

Point = Tuple[float, float]
Polygon = Sequence[Point]


def rotate_cw(point: Point) -> Point:
    """Rotate point by 90 degrees clockwise around the origin (exact in floating point)."""
    x, y = point
    return y, -x


def unit_vector(dx: float, dy: float) -> Tuple[float, float]:
    norm = math.sqrt(dx * dx + dy * dy)
    return dx / norm, dy / norm


def rectangle_corners(cx: float, cy: float, hx: float, hy: float,
                      length: float, width: float) -> Tuple[Point, Point, Point, Point]:
    """Corners of a rectangle centered at (cx, cy) with unit heading (hx, hy), in ring order."""
    half_l = length / 2
    half_w = width / 2
    # (hy, -hx) points to the right of the heading
    fx, fy = hx * half_l, hy * half_l
    rx, ry = hy * half_w, -hx * half_w
    return (
        (cx + fx + rx, cy + fy + ry),
        (cx + fx - rx, cy + fy - ry),
        (cx - fx - rx, cy - fy - ry),
        (cx - fx + rx, cy - fy + ry),
    )


def edge_vector(point1: Point, point2: Point) -> Point:
    """Vector going from point1 to point2."""
    return point2[0] - point1[0], point2[1] - point1[1]


def orthogonal(vector: Point) -> Point:
    return vector[1], -vector[0]


def project(poly: Polygon, axis: Point) -> Tuple[float, float]:
    """Min and max of the polygon projected on the axis."""
    dots = [point[0] * axis[0] + point[1] * axis[1] for point in poly]
    return min(dots), max(dots)


def overlap(projection1: Tuple[float, float], projection2: Tuple[float, float]) -> bool:
    return projection1[0] <= projection2[1] and projection2[0] <= projection1[1]


def rectangles_collide(rect1: Polygon, rect2: Polygon) -> bool:
    """Separating axis test for two rectangles given as 4 corners in ring order.

    Two adjacent edges per rectangle give all the candidate axes. Touching counts as a collision.
    """
    axes = (
        orthogonal(edge_vector(rect1[0], rect1[1])),
        orthogonal(edge_vector(rect1[1], rect1[2])),
        orthogonal(edge_vector(rect2[0], rect2[1])),
        orthogonal(edge_vector(rect2[1], rect2[2])),
    )
    for axis in axes:
        if not overlap(project(rect1, axis), project(rect2, axis)):
            return False
    return True


def rectangles_overlap_matrix(corners1: np.ndarray, corners2: np.ndarray) -> np.ndarray:
    """Vectorized separating axis test: (n1, n2) booleans for rectangle arrays (n1, 4, 2) and (n2, 4, 2)."""
    corners1 = np.asarray(corners1, dtype=np.float64)
    corners2 = np.asarray(corners2, dtype=np.float64)
    result = np.ones((len(corners1), len(corners2)), dtype=bool)
    for own, other, transpose in ((corners1, corners2, False), (corners2, corners1, True)):
        edges = np.stack((own[:, 1] - own[:, 0], own[:, 2] - own[:, 1]), axis=1)
        axes = np.stack((edges[..., 1], -edges[..., 0]), axis=-1)
        own_dots = np.einsum('nkd,nad->nak', own, axes)
        other_dots = np.einsum('mkd,nad->nmak', other, axes)
        own_min = own_dots.min(axis=2)[:, None, :]
        own_max = own_dots.max(axis=2)[:, None, :]
        overlapping = ((own_min <= other_dots.max(axis=3)) & (other_dots.min(axis=3) <= own_max)).all(axis=2)
        result &= overlapping.T if transpose else overlapping
    return result
