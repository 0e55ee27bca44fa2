"""
Module: Synthetic Scenarios

Seeded scene generator for fixtures and property tests. Every generated
pedestrian comes with analytic ground truth (footprint distance and, for the
crossing template, the straight-line collision time) in a metadata side
channel.

Templates:
- crossing: pedestrians ahead of the AV whose straight-line motion meets
  the AV front face at a known time
- static_near: standing pedestrians next to the AV (blind-spot cases)
- far_crowd: pedestrians well beyond the distance of interest
- random: uniform placement with a minimum clearance to the footprint
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from analysis.geometry import concat_centerlines, distance_point_to_rect, point_at_arclength
from analysis.reachability import av_footprint
from dataset.models import (
    AvState,
    CameraCalibration,
    Centerline,
    GroundTruthCuboid,
    PedestrianState,
    SceneFrame,
)

URBAN_SPEED_LIMIT = 13.4
FOOTPRINT_LENGTH = 4.5
FOOTPRINT_WIDTH = 1.8
BODY_RADIUS = 0.3
PEDESTRIAN_SIZE = (0.6, 0.6, 1.8)
CAMERA_HEIGHT = 1.5
IMAGE_SIZE = (1600, 900)
INTRINSICS = ((1266.4, 0.0, 816.3), (0.0, 1266.4, 491.5), (0.0, 0.0, 1.0))
PATH_BEHIND = 10.0
PATH_AHEAD = 220.0
MIN_CLEARANCE = 1.0


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    template: Literal["crossing", "static_near", "far_crowd", "random"] = "random"
    n_pedestrians: int = Field(default=1, ge=0)
    av_speed: float = Field(default=10.0, ge=0.0)
    seed: int = 0
    urban_bound: bool = True
    n_frames: int = Field(default=1, ge=1)
    frame_interval: float = Field(default=0.5, gt=0.0)
    ped_speed_max: float = Field(default=2.0, ge=0.0)
    gap_range: Tuple[float, float] = (5.0, 30.0)
    successor_turn: bool = False
    randomize_av_speed: bool = False

    @model_validator(mode="after")
    def _respect_speed_limit(self):
        if self.urban_bound and self.av_speed > URBAN_SPEED_LIMIT:
            raise ValueError(
                f"av_speed {self.av_speed} m/s exceeds the urban limit of {URBAN_SPEED_LIMIT} m/s"
            )
        if self.gap_range[0] > self.gap_range[1] or self.gap_range[0] <= 0:
            raise ValueError(f"gap_range must be positive and ordered, got {self.gap_range}")
        return self


@dataclass(frozen=True)
class PedestrianTruth:
    frame_id: str
    pedestrian_id: str
    distance: float
    straight_line_ttc: Optional[float]


@dataclass(frozen=True)
class GeneratedScenario:
    spec: ScenarioSpec
    frames: list
    truths: list

    def closing_distance(self, tau: float, a_max: float) -> float:
        """
        Largest initial footprint distance a collision at ``tau`` can bridge on
        a straight path: AV travel, pedestrian drift, acceleration reach and
        body radius.
        """
        return (
            self.spec.av_speed * tau
            + self.spec.ped_speed_max * tau
            + 0.5 * a_max * tau * tau
            + BODY_RADIUS
        )


def front_camera(position, heading: float) -> CameraCalibration:
    """Forward-looking camera above the AV reference point (x right, y down, z forward)."""
    c, s = math.cos(heading), math.sin(heading)
    rotation = np.array([[s, -c, 0.0], [0.0, 0.0, -1.0], [c, s, 0.0]])
    origin = np.array([position[0], position[1], CAMERA_HEIGHT])
    transform = np.eye(4)
    transform[:3, :3] = rotation
    transform[:3, 3] = -rotation @ origin
    return CameraCalibration(
        intrinsics=INTRINSICS,
        extrinsics=tuple(tuple(float(v) for v in row) for row in transform),
        image_width=IMAGE_SIZE[0],
        image_height=IMAGE_SIZE[1],
    )


class ScenarioGenerator:
    """
    Methods:
        generate: Frames and per-pedestrian truth for a ScenarioSpec.
    """

    def generate(self, spec: ScenarioSpec) -> GeneratedScenario:
        rng = np.random.default_rng(spec.seed)
        heading = 0.0 if spec.template == "crossing" else float(rng.uniform(-math.pi, math.pi))
        origin = np.zeros(2) if spec.template == "crossing" else rng.uniform(-500.0, 500.0, size=2)
        av_speed = float(rng.uniform(0.0, spec.av_speed)) if spec.randomize_av_speed else spec.av_speed
        centerlines = self._centerlines(origin, heading, spec, rng)

        placement = getattr(self, f"_place_{spec.template}")
        pedestrians, crossing_times = placement(origin, heading, av_speed, spec, rng)
        yaws = rng.uniform(-math.pi, math.pi, size=len(pedestrians))
        visibility = rng.integers(1, 5, size=len(pedestrians))

        path = concat_centerlines(centerlines[0], centerlines[1:])
        frames, truths = [], []
        for k in range(spec.n_frames):
            elapsed = k * spec.frame_interval
            frame_id = f"{spec.template}-{spec.seed:04d}-{k:03d}"
            arc_offset = min(PATH_BEHIND + av_speed * elapsed, path.length)
            position, path_heading = point_at_arclength(path, arc_offset)
            av = AvState(
                position=position,
                speed=av_speed,
                heading=path_heading,
                footprint_length=FOOTPRINT_LENGTH,
                footprint_width=FOOTPRINT_WIDTH,
                arc_offset=arc_offset,
            )
            frame_peds = [
                PedestrianState(
                    id=p.id,
                    position=(
                        p.position[0] + p.velocity[0] * elapsed,
                        p.position[1] + p.velocity[1] * elapsed,
                    ),
                    velocity=p.velocity,
                    body_radius=p.body_radius,
                )
                for p in pedestrians
            ]
            cuboids = [
                GroundTruthCuboid(
                    pedestrian_id=p.id,
                    center=(p.position[0], p.position[1], PEDESTRIAN_SIZE[2] / 2.0),
                    dimensions=PEDESTRIAN_SIZE,
                    yaw=float(yaws[i]),
                    visibility_bin=int(visibility[i]),
                )
                for i, p in enumerate(frame_peds)
            ]
            frames.append(
                SceneFrame(
                    frame_id=frame_id,
                    timestamp=round(elapsed, 9),
                    av=av,
                    centerlines=centerlines,
                    pedestrians=tuple(frame_peds),
                    camera=front_camera(position, path_heading),
                    cuboids=tuple(cuboids),
                )
            )
            footprint = av_footprint(av)
            for i, p in enumerate(frame_peds):
                straight = crossing_times[i]
                if straight is not None and math.isfinite(straight):
                    straight = max(straight - elapsed, 0.0)
                truths.append(
                    PedestrianTruth(
                        frame_id=frame_id,
                        pedestrian_id=p.id,
                        distance=distance_point_to_rect(p.position, footprint),
                        straight_line_ttc=straight,
                    )
                )
        return GeneratedScenario(spec=spec, frames=frames, truths=truths)

    @staticmethod
    def _centerlines(origin, heading, spec, rng) -> tuple:
        forward = np.array([math.cos(heading), math.sin(heading)])
        start = origin - forward * PATH_BEHIND
        if not spec.successor_turn:
            end = origin + forward * PATH_AHEAD
            return (Centerline(points=(tuple(start), tuple(end)), role="current"),)

        corner = origin + forward * float(rng.uniform(20.0, 80.0))
        turn = heading + math.copysign(math.pi / 2.0, rng.uniform(-1.0, 1.0))
        side = np.array([math.cos(turn), math.sin(turn)])
        return (
            Centerline(points=(tuple(start), tuple(corner)), role="current"),
            Centerline(
                points=(tuple(corner), tuple(corner + side * PATH_AHEAD)),
                role="successor",
                order_index=1,
            ),
        )

    @staticmethod
    def _world(origin, heading, local):
        c, s = math.cos(heading), math.sin(heading)
        return (
            float(origin[0] + local[0] * c - local[1] * s),
            float(origin[1] + local[0] * s + local[1] * c),
        )

    def _rotate(self, heading, vector):
        return self._world((0.0, 0.0), heading, vector)

    def _place_crossing(self, origin, heading, av_speed, spec, rng):
        half_length, half_width = FOOTPRINT_LENGTH / 2.0, FOOTPRINT_WIDTH / 2.0
        pedestrians, times = [], []
        for i in range(spec.n_pedestrians):
            gap = float(rng.uniform(*spec.gap_range))
            hit_time = gap / av_speed if av_speed > 0 else math.inf
            lateral_speed = float(rng.uniform(-1.5, 1.5))
            lateral_at_hit = float(rng.uniform(-0.8, 0.8)) * half_width
            if math.isfinite(hit_time):
                lateral_start = lateral_at_hit - lateral_speed * hit_time
            else:
                lateral_start = lateral_at_hit
            local = (half_length + BODY_RADIUS + gap, lateral_start)
            pedestrians.append(
                PedestrianState(
                    id=f"ped-{i:03d}",
                    position=self._world(origin, heading, local),
                    velocity=self._rotate(heading, (0.0, lateral_speed)),
                    body_radius=BODY_RADIUS,
                )
            )
            times.append(hit_time)
        return pedestrians, times

    def _place_static_near(self, origin, heading, av_speed, spec, rng):
        half_length, half_width = FOOTPRINT_LENGTH / 2.0, FOOTPRINT_WIDTH / 2.0
        pedestrians = []
        for i in range(spec.n_pedestrians):
            side = 1.0 if rng.uniform() < 0.5 else -1.0
            local = (
                float(rng.uniform(-half_length, half_length)),
                side * (half_width + float(rng.uniform(1.5, 5.0))),
            )
            pedestrians.append(
                PedestrianState(
                    id=f"ped-{i:03d}",
                    position=self._world(origin, heading, local),
                    velocity=(0.0, 0.0),
                    body_radius=BODY_RADIUS,
                )
            )
        return pedestrians, [None] * len(pedestrians)

    def _random_velocity(self, spec, rng):
        speed = float(rng.uniform(0.0, spec.ped_speed_max))
        angle = float(rng.uniform(-math.pi, math.pi))
        return (speed * math.cos(angle), speed * math.sin(angle))

    def _place_far_crowd(self, origin, heading, av_speed, spec, rng):
        pedestrians = []
        for i in range(spec.n_pedestrians):
            local = (float(rng.uniform(45.0, 120.0)), float(rng.uniform(-30.0, 30.0)))
            pedestrians.append(
                PedestrianState(
                    id=f"ped-{i:03d}",
                    position=self._world(origin, heading, local),
                    velocity=self._random_velocity(spec, rng),
                    body_radius=BODY_RADIUS,
                )
            )
        return pedestrians, [None] * len(pedestrians)

    def _place_random(self, origin, heading, av_speed, spec, rng):
        footprint = av_footprint(
            AvState(
                position=tuple(float(v) for v in origin),
                speed=0.0,
                heading=heading,
                footprint_length=FOOTPRINT_LENGTH,
                footprint_width=FOOTPRINT_WIDTH,
            )
        )
        pedestrians = []
        while len(pedestrians) < spec.n_pedestrians:
            local = (float(rng.uniform(-20.0, 60.0)), float(rng.uniform(-20.0, 20.0)))
            position = self._world(origin, heading, local)
            if distance_point_to_rect(position, footprint) < MIN_CLEARANCE + BODY_RADIUS:
                continue
            pedestrians.append(
                PedestrianState(
                    id=f"ped-{len(pedestrians):03d}",
                    position=position,
                    velocity=self._random_velocity(spec, rng),
                    body_radius=BODY_RADIUS,
                )
            )
        return pedestrians, [None] * len(pedestrians)
