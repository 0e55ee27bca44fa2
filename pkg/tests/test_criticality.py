import math

import numpy as np
import pytest

from analysis.criticality import (
    Criticality,
    CriticalityConfig,
    CriticalityMode,
    DistanceReference,
    RECORD_COLUMNS,
    Zone,
    dump_records,
    load_records,
    records_frame,
    zone_summary,
)
from analysis.reachability import Reachability, ReachabilityConfig
from dataset import load_scene
from errors import DomainError, SceneFormatError


@pytest.fixture
def criticality():
    return Criticality()


@pytest.mark.parametrize("d, expected", [(0.0, 1.0), (40.0, 0.0), (20.0, 0.75), (100.0, 0.0)])
def test_distance_criticality_anchors(criticality, d, expected):
    assert criticality.distance_criticality(d) == expected


@pytest.mark.parametrize("ttc, expected", [(0.0, 1.0), (6.0, 0.0), (3.0, 0.75), (math.inf, 0.0), (9.0, 0.0)])
def test_collision_criticality_anchors(criticality, ttc, expected):
    assert criticality.collision_criticality(ttc) == expected


@pytest.mark.parametrize("value", [-1.0, math.nan])
def test_negative_inputs_are_rejected(criticality, value):
    with pytest.raises(DomainError):
        criticality.distance_criticality(value)
    with pytest.raises(DomainError):
        criticality.collision_criticality(value)


@pytest.mark.parametrize("seed", range(5))
def test_criticality_never_grows_with_distance_or_time(criticality, seed):
    rng = np.random.default_rng(seed)
    distances = np.sort(rng.uniform(0.0, 60.0, 200))
    times = np.sort(rng.uniform(0.0, 9.0, 200))
    kappa_d = [criticality.distance_criticality(d) for d in distances]
    kappa_c = [criticality.collision_criticality(t) for t in times] + [criticality.collision_criticality(math.inf)]
    assert all(b <= a for a, b in zip(kappa_d, kappa_d[1:]))
    assert all(b <= a for a, b in zip(kappa_c, kappa_c[1:]))


def test_compose_weights_collision_twice(criticality):
    assert criticality.compose_kappa(1.0, 0.0) == pytest.approx(2.0 / 3.0)
    assert criticality.compose_kappa(0.0, 1.0) == pytest.approx(1.0 / 3.0)
    assert criticality.compose_kappa(1.0, 1.0) == 1.0


def test_compose_modes(criticality):
    assert criticality.compose_kappa(0.2, 0.9, CriticalityMode.collision_only) == 0.2
    assert criticality.compose_kappa(0.2, 0.9, "distance_only") == 0.9


def test_compose_rejects_values_outside_unit_interval(criticality):
    with pytest.raises(DomainError):
        criticality.compose_kappa(1.2, 0.0)


@pytest.mark.parametrize(
    "ttc, d, zone",
    [
        (1.0, 10.0, Zone.C),
        (5.0, 15.0, Zone.PC),
        (0.5, 30.0, Zone.NC),
        (math.inf, 30.0, Zone.NC),
        (1.7, 20.0, Zone.C),
        (1.7000001, 20.0, Zone.PC),
        (math.inf, 5.0, Zone.PC),
    ],
)
def test_zone_partition(criticality, ttc, d, zone):
    assert criticality.assign_zone(ttc, d) is zone


def test_config_orders_thresholds():
    with pytest.raises(ValueError):
        CriticalityConfig(d_crit=50.0)
    with pytest.raises(ValueError):
        CriticalityConfig(ttc_crit=7.0)


def test_empty_frame(criticality, frame_factory):
    assert criticality.annotate_frame(frame_factory()) == []


def test_far_static_pedestrian_is_not_critical(criticality, frame_factory):
    frame = frame_factory(pedestrians=[("p", (0.0, 101.0), (0.0, 0.0))])
    record = criticality.annotate_frame(frame)[0]
    assert record.distance == pytest.approx(100.1)
    assert record.kappa == 0.0
    assert record.zone is Zone.NC


def test_blind_spot_keeps_distance_criticality(frame_factory):
    frame = frame_factory(speed=0.0, pedestrians=[("p", (0.0, 3.9), (0.0, 0.0))])
    criticality = Criticality(ReachabilityConfig(a_max=0.0))
    record = criticality.annotate_frame(frame)[0]
    assert math.isinf(record.ttc)
    assert record.kappa_c == 0.0
    assert record.distance == pytest.approx(3.0)
    assert record.kappa_d > 0.99
    assert record.zone is Zone.PC


def test_records_compose_single_operations(crossing_path):
    criticality = Criticality()
    frame = load_scene(crossing_path)[0]
    ttc = {r.pedestrian_id: r.ttc for r in Reachability().annotate_frame_ttc(frame)}
    for record in criticality.annotate_frame(frame):
        ped = next(p for p in frame.pedestrians if p.id == record.pedestrian_id)
        distance = criticality.pedestrian_distance(frame.av, ped)
        assert record.ttc == ttc[ped.id]
        assert record.distance == distance
        assert record.kappa_c == criticality.collision_criticality(record.ttc)
        assert record.kappa_d == criticality.distance_criticality(distance)
        assert record.kappa == criticality.compose_kappa(record.kappa_c, record.kappa_d)
        assert record.zone is criticality.assign_zone(record.ttc, distance)


def test_crossing_fixture_values(crossing_path):
    records = {r.pedestrian_id: r for r in Criticality().annotate_frame(load_scene(crossing_path)[0])}
    assert records["ped-front"].ttc == pytest.approx(1.6)
    assert records["ped-front"].distance == pytest.approx(17.75)
    assert records["ped-front"].zone is Zone.C
    assert records["ped-far"].zone is Zone.NC


def test_center_distance_reference(frame_factory):
    frame = frame_factory(pedestrians=[("p", (0.0, 5.0), (0.0, 0.0))])
    footprint = Criticality().annotate_frame(frame)[0]
    center = Criticality(config=CriticalityConfig(distance_reference=DistanceReference.center)).annotate_frame(frame)[0]
    assert footprint.distance == pytest.approx(4.1)
    assert center.distance == pytest.approx(5.0)


def test_kappa_stays_in_unit_interval(ten_frames_path):
    criticality = Criticality()
    for frame in load_scene(ten_frames_path):
        for record in criticality.annotate_frame(frame):
            assert 0.0 <= record.kappa <= 1.0


def test_records_frame_and_summary(ten_frames_path):
    criticality = Criticality()
    records = [r for frame in load_scene(ten_frames_path) for r in criticality.annotate_frame(frame)]
    table = records_frame(records)
    assert list(table.columns) == RECORD_COLUMNS
    assert len(table) == 40

    summary = zone_summary(records)
    assert list(summary["zone"]) == ["C", "PC", "NC"]
    assert summary["count"].sum() == 40
    assert summary["share"].sum() == pytest.approx(1.0)


def test_empty_zone_summary():
    summary = zone_summary([])
    assert list(summary["count"]) == [0, 0, 0]


def test_record_file_round_trip(tmp_path, crossing_path):
    records = Criticality(ReachabilityConfig(a_max=0.0)).annotate_frame(load_scene(crossing_path)[0])
    path = tmp_path / "records.json"
    dump_records(records, path, {"reachability": {"a_max": 0.0}})
    assert load_records(path) == sorted(records, key=lambda r: (r.frame_id, r.pedestrian_id))
    assert '"ttc": null' in path.read_text()


def test_malformed_record_file(tmp_path):
    path = tmp_path / "records.json"
    path.write_text('{"records": [{"frame_id": "f"}]}')
    with pytest.raises(SceneFormatError):
        load_records(path)


def test_record_file_with_invalid_utf8(tmp_path):
    path = tmp_path / "records.json"
    path.write_bytes(b'{"records": [\xff]}')
    with pytest.raises(SceneFormatError, match="UTF-8"):
        load_records(path)
