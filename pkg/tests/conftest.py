from pathlib import Path

import pytest

from analysis.scenario import front_camera
from dataset.models import (
    AvState,
    Centerline,
    GroundTruthCuboid,
    PedestrianState,
    SceneFrame,
)

SAMPLES = Path(__file__).resolve().parent.parent / "dataset" / "samples"


@pytest.fixture
def ten_frames_path():
    return SAMPLES / "ten_frames.json"


@pytest.fixture
def crossing_path():
    return SAMPLES / "crossing.json"


@pytest.fixture
def detections_path():
    return SAMPLES / "detections.json"


def make_frame(
    pedestrians=(),
    speed=10.0,
    frame_id="frame-0",
    timestamp=0.0,
    path_points=((-10.0, 0.0), (200.0, 0.0)),
    arc_offset=10.0,
    successors=(),
    cuboids=None,
    visibility=4,
):
    """
    AV at the origin heading +x on a straight lane, 4.5 x 1.8 m footprint.

    ``pedestrians`` holds (id, position, velocity) tuples; a 0.6 x 0.6 x 1.8 m
    cuboid is added for each one unless ``cuboids`` is given.
    """
    peds = tuple(
        PedestrianState(id=pid, position=position, velocity=velocity)
        for pid, position, velocity in pedestrians
    )
    if cuboids is None:
        cuboids = tuple(
            GroundTruthCuboid(
                pedestrian_id=p.id,
                center=(p.position[0], p.position[1], 0.9),
                dimensions=(0.6, 0.6, 1.8),
                visibility_bin=visibility,
            )
            for p in peds
        )
    centerlines = (Centerline(points=path_points, role="current"),) + tuple(
        Centerline(points=points, role="successor", order_index=i + 1)
        for i, points in enumerate(successors)
    )
    return SceneFrame(
        frame_id=frame_id,
        timestamp=timestamp,
        av=AvState(
            position=(0.0, 0.0),
            speed=speed,
            heading=0.0,
            footprint_length=4.5,
            footprint_width=1.8,
            arc_offset=arc_offset,
        ),
        centerlines=centerlines,
        pedestrians=peds,
        camera=front_camera((0.0, 0.0), 0.0),
        cuboids=tuple(cuboids),
    )


@pytest.fixture
def frame_factory():
    return make_frame
