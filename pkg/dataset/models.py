"""
Module: Scene Data Model

Frozen pydantic models for everything physical in a scene. Units are SI in
the bird's-eye view (m, s, rad); image-space quantities are pixels.

- AvState, PedestrianState: agent states at the frame timestamp
- Centerline: current and successor lane centerlines
- CameraCalibration, GroundTruthCuboid: front camera and 3D annotations
- SceneFrame: one timestamped snapshot
- Detection: one 2D detector output
"""

import math
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Point2 = Tuple[float, float]
Point3 = Tuple[float, float, float]

DEFAULT_BODY_RADIUS = 0.3
DEFAULT_FOV_HALF_ANGLE = math.radians(35.0)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class AvState(_Frozen):
    position: Point2
    speed: float = Field(ge=0.0)
    heading: float = Field(ge=-math.pi, le=math.pi)
    footprint_length: float = Field(gt=0.0)
    footprint_width: float = Field(gt=0.0)
    arc_offset: float = Field(default=0.0, ge=0.0)


class PedestrianState(_Frozen):
    id: str
    position: Point2
    velocity: Point2 = (0.0, 0.0)
    body_radius: float = Field(default=DEFAULT_BODY_RADIUS, gt=0.0)


class Centerline(_Frozen):
    points: Tuple[Point2, ...] = Field(min_length=2)
    role: Literal["current", "successor"]
    order_index: int = 0

    @field_validator("points")
    @classmethod
    def _distinct_neighbours(cls, points):
        for a, b in zip(points, points[1:]):
            if a[0] == b[0] and a[1] == b[1]:
                raise ValueError(f"consecutive points must differ, got {a} twice")
        return points


class CameraCalibration(_Frozen):
    intrinsics: Tuple[Point3, Point3, Point3]
    extrinsics: Tuple[
        Tuple[float, float, float, float],
        Tuple[float, float, float, float],
        Tuple[float, float, float, float],
        Tuple[float, float, float, float],
    ]
    image_width: int = Field(gt=0)
    image_height: int = Field(gt=0)
    fov_half_angle: float = Field(default=DEFAULT_FOV_HALF_ANGLE, gt=0.0, lt=math.pi / 2)

    @field_validator("intrinsics")
    @classmethod
    def _positive_focal_lengths(cls, k):
        if k[0][0] <= 0 or k[1][1] <= 0:
            raise ValueError("focal lengths fx, fy must be > 0")
        return k

    @field_validator("extrinsics")
    @classmethod
    def _rigid_transform(cls, t):
        matrix = np.asarray(t, dtype=float)
        if not np.allclose(matrix[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("last row of the world->camera transform must be 0 0 0 1")
        rotation = matrix[:3, :3]
        if not np.allclose(rotation @ rotation.T, np.eye(3), atol=1e-6):
            raise ValueError("rotation block of the world->camera transform is not orthonormal")
        return t

    @property
    def K(self) -> np.ndarray:
        return np.asarray(self.intrinsics, dtype=float)

    @property
    def world_to_camera(self) -> np.ndarray:
        return np.asarray(self.extrinsics, dtype=float)


class GroundTruthCuboid(_Frozen):
    pedestrian_id: str
    center: Point3
    dimensions: Point3
    yaw: float = 0.0
    visibility_bin: int = Field(ge=1, le=4)

    @field_validator("dimensions")
    @classmethod
    def _positive_dimensions(cls, dims):
        if min(dims) <= 0:
            raise ValueError("cuboid dimensions must be > 0")
        return dims


class SceneFrame(_Frozen):
    frame_id: str
    timestamp: float
    av: AvState
    centerlines: Tuple[Centerline, ...]
    pedestrians: Tuple[PedestrianState, ...] = ()
    camera: CameraCalibration
    cuboids: Tuple[GroundTruthCuboid, ...] = ()

    @model_validator(mode="after")
    def _check_references(self):
        current = [c for c in self.centerlines if c.role == "current"]
        if len(current) != 1:
            raise ValueError(
                f"centerlines: expected exactly one current centerline, got {len(current)}"
            )

        successors = [c.order_index for c in self.centerlines if c.role == "successor"]
        for a, b in zip(successors, successors[1:]):
            if b != a + 1:
                raise ValueError(
                    "centerlines: successor order_index values must be strictly "
                    f"increasing and contiguous, got {successors}"
                )

        ids = [p.id for p in self.pedestrians]
        if len(ids) != len(set(ids)):
            raise ValueError("pedestrians: ids must be unique within a frame")

        known = set(ids)
        for cuboid in self.cuboids:
            if cuboid.pedestrian_id not in known:
                raise ValueError(
                    f"cuboids: pedestrian_id {cuboid.pedestrian_id!r} has no pedestrian state"
                )
        return self

    @property
    def current_centerline(self) -> Centerline:
        return next(c for c in self.centerlines if c.role == "current")

    @property
    def successor_centerlines(self) -> list:
        return sorted(
            (c for c in self.centerlines if c.role == "successor"),
            key=lambda c: c.order_index,
        )


class Detection(_Frozen):
    frame_id: str
    box: Tuple[float, float, float, float]
    confidence: float = Field(ge=0.0, le=1.0)
    class_: str = Field(default="pedestrian", alias="class")

    @field_validator("box")
    @classmethod
    def _ordered_corners(cls, box):
        x_min, y_min, x_max, y_max = box
        if not x_min < x_max:
            raise ValueError(f"x_min must be < x_max, got {x_min} >= {x_max}")
        if not y_min < y_max:
            raise ValueError(f"y_min must be < y_max, got {y_min} >= {y_max}")
        return box
