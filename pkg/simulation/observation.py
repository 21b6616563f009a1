"""Egocentric bird's-eye frames.

Each frame is a (3, H, W) float32 array with the ego vehicle at the center and its heading pointing up:
channel 0 is the drivable area, channel 1 the other vehicles and channel 2 the ego's remaining route.
A pixel is set when its center falls inside the rasterized shape, so frames are binary.
"""
import functools
import logging
import struct
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from simulation.geometry import route_path
from simulation.world import WorldState, vehicle_pose

logger = logging.getLogger(__name__)

FRAME_CHANNELS = 3
DEFAULT_FRAME_SIZE = 48
COMPACT_FRAME_SIZES = (16, 24, 32, 48)
DEFAULT_VIEW_EXTENT = 50.0
FRAME_DUMP_MAGIC = b'FRM1'


class VehicleNotFoundError(ValueError):
    pass


class FrameShapeError(ValueError):
    pass


@functools.lru_cache(maxsize=None)
def _pixel_offsets(size: int, view_extent: float) -> Tuple[np.ndarray, np.ndarray]:
    """Forward and rightward offsets (meters) of every pixel center from the ego position."""
    resolution = view_extent / size
    centers = (np.arange(size) + 0.5) * resolution - view_extent / 2
    forward = np.repeat(-centers[:, None], size, axis=1)
    right = np.repeat(centers[None, :], size, axis=0)
    forward.setflags(write=False)
    right.setflags(write=False)
    return forward, right


def _drivable_mask(xs: np.ndarray, ys: np.ndarray, geometry) -> np.ndarray:
    half_road = geometry.lane_width
    extent = geometry.road_extent
    box = geometry.stop_line_offset
    abs_x = np.abs(xs)
    abs_y = np.abs(ys)
    vertical = (abs_x <= half_road) & (abs_y <= extent)
    horizontal = (abs_y <= half_road) & (abs_x <= extent)
    center = (abs_x <= box) & (abs_y <= box)
    return vertical | horizontal | center


def _route_mask(xs: np.ndarray, ys: np.ndarray, vehicle, geometry) -> np.ndarray:
    path = route_path(vehicle.route[0], vehicle.route[1], geometry)
    x, y, _, _ = path.pose_at(vehicle.s)
    first = int(np.searchsorted(path.cumulative, vehicle.s, side='right'))
    points_x = np.array((x,) + path.xs[first:])
    points_y = np.array((y,) + path.ys[first:])
    half_width = geometry.lane_width / 2
    if len(points_x) < 2:
        return np.zeros(xs.shape, dtype=bool)
    ax, ay = points_x[:-1], points_y[:-1]
    ex, ey = points_x[1:] - ax, points_y[1:] - ay
    lengths = ex * ex + ey * ey
    keep = lengths > 0.0
    ax, ay, ex, ey, lengths = ax[keep], ay[keep], ex[keep], ey[keep], lengths[keep]

    # pixels x segments
    px = xs.reshape(-1, 1) - ax
    py = ys.reshape(-1, 1) - ay
    t = np.clip((px * ex + py * ey) / lengths, 0.0, 1.0)
    dx = px - t * ex
    dy = py - t * ey
    near = (dx * dx + dy * dy <= half_width * half_width).any(axis=1)
    return near.reshape(xs.shape)


def render_frame(world: WorldState, ego_id: int, resolution: int = DEFAULT_FRAME_SIZE,
                 view_extent: float = DEFAULT_VIEW_EXTENT) -> np.ndarray:
    ego = world.vehicle(ego_id)
    if ego is None:
        raise VehicleNotFoundError(f'Vehicle {ego_id} is not in the world')
    geometry = world.geometry
    ex, ey, hx, hy = vehicle_pose(ego, geometry)
    forward, right = _pixel_offsets(resolution, view_extent)
    # right-hand direction of the ego is (hy, -hx)
    xs = ex + forward * hx + right * hy
    ys = ey + forward * hy + right * -hx

    frame = np.zeros((FRAME_CHANNELS, resolution, resolution), dtype=np.float32)
    frame[0] = _drivable_mask(xs, ys, geometry)

    view_radius = view_extent * 0.75
    for other in world.vehicles:
        if other.id == ego_id or other.done:
            continue
        ox, oy, ohx, ohy = vehicle_pose(other, geometry)
        if abs(ox - ex) > view_radius + other.length or abs(oy - ey) > view_radius + other.length:
            continue
        dx = xs - ox
        dy = ys - oy
        along = dx * ohx + dy * ohy
        across = dx * ohy - dy * ohx
        inside = (np.abs(along) <= other.length / 2) & (np.abs(across) <= other.width / 2)
        frame[1][inside] = 1.0

    frame[2] = _route_mask(xs, ys, ego, geometry)
    return frame


@dataclass(frozen=True)
class FrameStack:
    """The last n frames, oldest first."""
    frames: Tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return len(self.frames)

    def as_tensor(self) -> np.ndarray:
        return np.concatenate(self.frames, axis=0)


def reset_stack(frame: np.ndarray, n: int = 3) -> FrameStack:
    return FrameStack(tuple(frame for _ in range(n)))


def push_frame(stack: FrameStack, frame: np.ndarray) -> FrameStack:
    if frame.shape != stack.frames[-1].shape:
        raise FrameShapeError(f'Frame shape {frame.shape} does not match stack shape {stack.frames[-1].shape}')
    return FrameStack(stack.frames[1:] + (frame,))


def dump_frame(frame: np.ndarray, path) -> None:
    """Raw dump: magic, (channels, H, W) as little-endian uint32, then row-major float32 values."""
    channels, height, width = frame.shape
    with open(path, 'wb') as f:
        f.write(FRAME_DUMP_MAGIC + struct.pack('<III', channels, height, width))
        f.write(np.ascontiguousarray(frame, dtype='<f4').tobytes())


def load_frame(path) -> np.ndarray:
    with open(path, 'rb') as f:
        data = f.read()
    if data[:4] != FRAME_DUMP_MAGIC or len(data) < 16:
        raise FrameShapeError(f'{path} is not a frame dump')
    channels, height, width = struct.unpack('<III', data[4:16])
    values = np.frombuffer(data, dtype='<f4', offset=16)
    if values.size != channels * height * width:
        raise FrameShapeError(f'{path} holds {values.size} values, header says {channels}x{height}x{width}')
    return values.reshape(channels, height, width).astype(np.float32)
