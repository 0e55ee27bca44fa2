"""
Module: Planar Geometry

Arc-length parametrized polylines, oriented rectangles and discs, with the
exact predicates the reachability analysis is built on. All shapes are
closed regions; touching counts as intersecting.
"""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from errors import DiscontinuousMapError, OutOfPathError

MAX_JOINT_GAP = 0.5
_ARC_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Polyline:
    """
    Attributes:
        points (numpy.ndarray): (N, 2) vertices in metres.
        cumulative_lengths (numpy.ndarray): arc length at every vertex, starting at 0.
    """

    points: np.ndarray
    cumulative_lengths: np.ndarray = field(init=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(points) < 2:
            raise ValueError("a polyline needs at least two points")
        seg = np.hypot(*np.diff(points, axis=0).T)
        if np.any(seg <= 0):
            raise ValueError("consecutive polyline points must differ")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "cumulative_lengths", np.concatenate(([0.0], np.cumsum(seg))))

    @property
    def length(self) -> float:
        return float(self.cumulative_lengths[-1])


@dataclass(frozen=True)
class OrientedRect:
    center: Tuple[float, float]
    half_length: float
    half_width: float
    heading: float

    def __post_init__(self):
        if self.half_length <= 0 or self.half_width <= 0:
            raise ValueError("rectangle half dimensions must be > 0")

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        local = np.array(
            [
                [self.half_length, self.half_width],
                [self.half_length, -self.half_width],
                [-self.half_length, -self.half_width],
                [-self.half_length, self.half_width],
            ]
        )
        rotation = np.array([[c, -s], [s, c]])
        return local @ rotation.T + np.asarray(self.center)


@dataclass(frozen=True)
class Disc:
    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("disc radius must be >= 0")


@dataclass(frozen=True)
class FootprintSweep:
    """Union of footprint rectangles placed along an arc-length interval."""

    rects: Tuple[OrientedRect, ...]


def concat_centerlines(current, successors, max_gap: float = MAX_JOINT_GAP) -> Polyline:
    """
    Join the current centerline and its successors into one path.

    Successors are taken in ``order_index`` order. A joint gap up to
    ``max_gap`` is bridged by a connecting segment.

    Raises:
        DiscontinuousMapError: if consecutive pieces are further apart than ``max_gap``.
    """
    pieces = [current, *sorted(successors, key=lambda c: c.order_index)]
    points = [tuple(p) for p in pieces[0].points]
    for previous, piece in zip(pieces, pieces[1:]):
        start = piece.points[0]
        gap = math.dist(points[-1], start)
        if gap > max_gap:
            raise DiscontinuousMapError(
                f"gap of {gap:.3f} m between centerline {previous.order_index} "
                f"and successor {piece.order_index} exceeds {max_gap} m"
            )
        tail = piece.points if gap > 0 else piece.points[1:]
        points.extend(tuple(p) for p in tail)
    return Polyline(np.asarray(points))


def point_at_arclength(path: Polyline, s: float):
    """
    Locate arc length ``s`` on ``path``.

    Returns:
        tuple: ((x, y), heading of the containing segment)

    Raises:
        OutOfPathError: if ``s`` is outside ``[0, path.length]``.
    """
    if s < -_ARC_TOLERANCE or s > path.length + _ARC_TOLERANCE or math.isnan(s):
        raise OutOfPathError(f"arc length {s:.3f} m outside path of length {path.length:.3f} m")
    cum = path.cumulative_lengths
    idx = int(np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(cum) - 2))
    a, b = path.points[idx], path.points[idx + 1]
    t = min(max((s - cum[idx]) / (cum[idx + 1] - cum[idx]), 0.0), 1.0)
    point = a + t * (b - a)
    heading = math.atan2(b[1] - a[1], b[0] - a[0])
    return (float(point[0]), float(point[1])), heading


def points_at_arclengths(path: Polyline, s: np.ndarray):
    """Vectorized :func:`point_at_arclength` for values already inside the path."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, path.length)
    cum = path.cumulative_lengths
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(cum) - 2)
    a, b = path.points[idx], path.points[idx + 1]
    t = ((s - cum[idx]) / (cum[idx + 1] - cum[idx]))[:, None]
    d = b - a
    return a + t * d, np.arctan2(d[:, 1], d[:, 0])


def _to_rect_frame(points: np.ndarray, rect: OrientedRect) -> np.ndarray:
    c, s = math.cos(rect.heading), math.sin(rect.heading)
    delta = np.asarray(points, dtype=float) - np.asarray(rect.center)
    lx = delta[..., 0] * c + delta[..., 1] * s
    ly = -delta[..., 0] * s + delta[..., 1] * c
    return np.stack([lx, ly], axis=-1)


def distance_point_to_rect(p, rect: OrientedRect) -> float:
    """Euclidean distance from ``p`` to the closed rectangle; 0 inside."""
    local = _to_rect_frame(np.asarray(p, dtype=float), rect)
    qx = max(abs(float(local[0])) - rect.half_length, 0.0)
    qy = max(abs(float(local[1])) - rect.half_width, 0.0)
    return math.hypot(qx, qy)


def distances_points_to_rect(points: np.ndarray, rect: OrientedRect) -> np.ndarray:
    local = _to_rect_frame(points, rect)
    qx = np.maximum(np.abs(local[..., 0]) - rect.half_length, 0.0)
    qy = np.maximum(np.abs(local[..., 1]) - rect.half_width, 0.0)
    return np.hypot(qx, qy)


def disc_rect_intersects(disc: Disc, rect: OrientedRect) -> bool:
    return distance_point_to_rect(disc.center, rect) <= disc.radius


def disc_shape_intersects(disc: Disc, shape) -> bool:
    if isinstance(shape, FootprintSweep):
        return any(disc_rect_intersects(disc, rect) for rect in shape.rects)
    return disc_rect_intersects(disc, shape)
