import math

import pytest

from analysis.criticality import Criticality, CriticalityRecord, Zone
from analysis.curation import (
    BEHIND_CAMERA,
    OUTSIDE_FOV,
    Curation,
    cuboid_corners,
    discard_frame,
    dump_curated,
    load_curated,
)
from dataset import load_scene
from dataset.models import CameraCalibration, GroundTruthCuboid
from errors import CalibrationError, MissingAnnotationError, SceneFormatError

IDENTITY = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
)


def optical_camera(intrinsics=((1000.0, 0.0, 800.0), (0.0, 1000.0, 450.0), (0.0, 0.0, 1.0))):
    return CameraCalibration(
        intrinsics=intrinsics, extrinsics=IDENTITY, image_width=1600, image_height=900
    )


def cube_at(center, size=1.0, pedestrian_id="p"):
    return GroundTruthCuboid(
        pedestrian_id=pedestrian_id,
        center=center,
        dimensions=(size, size, size),
        visibility_bin=4,
    )


def annotate(frames):
    criticality = Criticality()
    return [r for frame in frames for r in criticality.annotate_frame(frame)]


def test_unit_cube_on_the_optical_axis():
    box = Curation().project_cuboid(cube_at((0.0, 0.0, 10.0)), optical_camera())
    half = 1000.0 * 0.5 / 9.5
    assert box == pytest.approx((800.0 - half, 450.0 - half, 800.0 + half, 450.0 + half))
    assert box[2] - box[0] == pytest.approx(105.263, abs=1e-3)


def test_cuboid_corners_follow_the_yaw():
    cuboid = GroundTruthCuboid(
        pedestrian_id="p", center=(10.0, 5.0, 0.9), dimensions=(2.0, 1.0, 1.8), yaw=math.pi / 2, visibility_bin=4
    )
    corners = cuboid_corners(cuboid)
    assert corners.shape == (8, 3)
    assert corners.min(axis=0) == pytest.approx([9.5, 4.0, 0.0])
    assert corners.max(axis=0) == pytest.approx([10.5, 6.0, 1.8])


def test_cube_behind_the_camera_projects_to_nothing():
    assert Curation().project_cuboid(cube_at((0.0, 0.0, -10.0)), optical_camera()) is None


def test_box_is_clipped_to_the_image():
    box = Curation().project_cuboid(cube_at((0.0, 0.0, 1.0), size=1.5), optical_camera())
    assert box == (0.0, 0.0, 1600.0, 900.0)


def test_singular_intrinsics():
    camera = optical_camera(((1000.0, 0.0, 800.0), (0.0, 1000.0, 450.0), (0.0, 0.0, 0.0)))
    with pytest.raises(CalibrationError):
        Curation().project_cuboid(cube_at((0.0, 0.0, 10.0)), camera)


@pytest.mark.parametrize("degrees, kept", [(0.0, True), (35.0, True), (-35.0, True), (40.0, False)])
def test_fov_bearings(degrees, kept):
    angle = math.radians(degrees)
    cuboid = cube_at((10.0 * math.sin(angle), 0.0, 10.0 * math.cos(angle)))
    assert Curation().fov_filter(cuboid, optical_camera()) is kept


@pytest.mark.parametrize("scale", [0.5, 3.0, 40.0])
def test_fov_ignores_distance_and_elevation(scale):
    angle = math.radians(30.0)
    cuboid = cube_at((scale * math.sin(angle), -5.0 * scale, scale * math.cos(angle)))
    assert Curation().fov_filter(cuboid, optical_camera())


def test_first_fixture_frame(ten_frames_path):
    frames = load_scene(ten_frames_path)
    result = Curation().curate_frame(frames[0], annotate(frames[:1]))
    assert [b.pedestrian_id for b in result.boxes] == ["ped-a", "ped-b", "ped-c"]
    assert [(d.pedestrian_id, d.reason) for d in result.discarded] == [("ped-d", OUTSIDE_FOV)]

    ped_b = result.boxes[1]
    assert ped_b.box == pytest.approx((350.9, 459.0, 435.4, 653.9), abs=0.5)
    assert ped_b.diagonal_px == pytest.approx(math.hypot(ped_b.box[2] - ped_b.box[0], ped_b.box[3] - ped_b.box[1]))
    assert ped_b.visibility_bin == 3


def test_boxes_carry_their_records(ten_frames_path):
    frames = load_scene(ten_frames_path)
    records = {r.pedestrian_id: r for r in annotate(frames[:1])}
    for box in Curation().curate_frame(frames[0], records.values()).boxes:
        record = records[box.pedestrian_id]
        assert (box.kappa, box.zone, box.ttc, box.distance) == (
            record.kappa,
            record.zone,
            record.ttc,
            record.distance,
        )


def test_pedestrian_behind_the_camera(ten_frames_path):
    frames = load_scene(ten_frames_path)
    result = Curation().curate_frame(frames[3], annotate(frames[3:4]))
    assert (frames[3].frame_id, "ped-d", BEHIND_CAMERA) in {
        (d.frame_id, d.pedestrian_id, d.reason) for d in result.discarded
    }


def test_all_cuboids_behind_the_camera(frame_factory):
    frame = frame_factory(pedestrians=[("a", (-10.0, 1.0), (0.0, 0.0)), ("b", (-20.0, -2.0), (0.0, 0.0))])
    result = Curation().curate_frame(frame, annotate([frame]))
    assert result.boxes == []
    assert {d.reason for d in result.discarded} == {BEHIND_CAMERA}


def test_pass_through_frame(frame_factory):
    frame = frame_factory(pedestrians=[("a", (15.0, 1.0), (0.0, 0.0)), ("b", (30.0, -3.0), (0.0, 0.0))])
    result = Curation().curate_frame(frame, annotate([frame]))
    assert len(result.boxes) == len(frame.cuboids)
    assert result.discarded == []


def test_missing_record(frame_factory):
    frame = frame_factory(pedestrians=[("a", (15.0, 1.0), (0.0, 0.0))])
    other = CriticalityRecord("another-frame", "a", 1.0, 5.0, 0.9, 0.9, 0.9, Zone.C)
    with pytest.raises(MissingAnnotationError):
        Curation().curate_frame(frame, [other])


def test_curated_file_round_trip(tmp_path, ten_frames_path):
    frames = load_scene(ten_frames_path)
    records = annotate(frames)
    boxes, discarded = [], []
    for frame in frames:
        result = Curation().curate_frame(frame, records)
        boxes += result.boxes
        discarded += result.discarded

    path = tmp_path / "curated.json"
    dump_curated([f.frame_id for f in frames], boxes, discarded, path, {})
    frame_ids, loaded = load_curated(path)
    assert frame_ids == sorted(f.frame_id for f in frames)
    assert loaded == sorted(boxes, key=lambda b: (b.frame_id, b.pedestrian_id))

    table = discard_frame(discarded)
    assert list(table.columns) == ["frame_id", "pedestrian_id", "reason"]
    assert (table[table["pedestrian_id"] == "ped-d"]["reason"].iloc[0]) == OUTSIDE_FOV


def test_curated_file_with_invalid_utf8(tmp_path):
    path = tmp_path / "curated.json"
    path.write_bytes(b'{"frames": ["\xff"], "boxes": []}')
    with pytest.raises(SceneFormatError, match="UTF-8"):
        load_curated(path)
