import math

import pytest

from analysis.criticality import Criticality
from analysis.evaluation import Evaluation
from analysis.reachability import ReachabilityConfig
from analysis.scenario import URBAN_SPEED_LIMIT, ScenarioGenerator, ScenarioSpec


@pytest.fixture
def generator():
    return ScenarioGenerator()


def test_crossing_collision_time(generator):
    spec = ScenarioSpec(template="crossing", n_pedestrians=1, av_speed=10.0, gap_range=(17.0, 17.0))
    scenario = generator.generate(spec)
    truth = scenario.truths[0]
    assert truth.straight_line_ttc == pytest.approx(1.7)
    assert truth.distance >= 17.3 - 1e-9

    record = Criticality().annotate_frame(scenario.frames[0])[0]
    assert record.ttc <= truth.straight_line_ttc + 0.1


def test_crossing_truth_counts_down_over_frames(generator):
    spec = ScenarioSpec(template="crossing", n_pedestrians=2, av_speed=8.0, n_frames=3, seed=4)
    scenario = generator.generate(spec)
    by_pedestrian = {}
    for truth in scenario.truths:
        by_pedestrian.setdefault(truth.pedestrian_id, []).append(truth.straight_line_ttc)
    for times in by_pedestrian.values():
        assert times[1] == pytest.approx(max(times[0] - 0.5, 0.0))


def test_no_pedestrians(generator):
    scenario = generator.generate(ScenarioSpec(n_pedestrians=0, n_frames=2))
    assert len(scenario.frames) == 2
    assert all(frame.pedestrians == () for frame in scenario.frames)
    assert scenario.truths == []


@pytest.mark.parametrize("template", ["crossing", "static_near", "far_crowd", "random"])
def test_same_seed_same_scene(generator, template):
    spec = ScenarioSpec(template=template, n_pedestrians=3, seed=42, n_frames=2, successor_turn=True)
    first, second = generator.generate(spec), generator.generate(spec)
    assert first.frames == second.frames
    assert first.truths == second.truths


def test_frame_ids_and_timestamps(generator):
    scenario = generator.generate(ScenarioSpec(template="random", seed=7, n_frames=3))
    assert [f.frame_id for f in scenario.frames] == ["random-0007-000", "random-0007-001", "random-0007-002"]
    assert [f.timestamp for f in scenario.frames] == [0.0, 0.5, 1.0]


def test_urban_speed_limit():
    with pytest.raises(ValueError):
        ScenarioSpec(av_speed=URBAN_SPEED_LIMIT + 1.0)
    assert ScenarioSpec(av_speed=25.0, urban_bound=False).av_speed == 25.0


def test_gap_range_must_be_ordered():
    with pytest.raises(ValueError):
        ScenarioSpec(gap_range=(10.0, 5.0))


def test_far_crowd_is_not_critical(generator):
    scenario = generator.generate(ScenarioSpec(template="far_crowd", n_pedestrians=5, seed=1))
    assert all(t.distance > 40.0 for t in scenario.truths)
    records = Criticality().annotate_frame(scenario.frames[0])
    assert all(r.zone.value == "NC" for r in records)


def test_static_near_stays_beside_the_av(generator):
    scenario = generator.generate(ScenarioSpec(template="static_near", n_pedestrians=4, av_speed=0.0, seed=2))
    assert all(1.5 - 1e-9 <= t.distance <= 5.0 + 1e-9 for t in scenario.truths)


def test_successor_turn_keeps_the_av_on_the_path(generator):
    spec = ScenarioSpec(template="random", seed=9, n_frames=40, successor_turn=True, av_speed=13.4)
    scenario = generator.generate(spec)
    assert len(scenario.frames[0].centerlines) == 2
    arc_offsets = [f.av.arc_offset for f in scenario.frames]
    assert all(b >= a for a, b in zip(arc_offsets, arc_offsets[1:]))


@pytest.mark.parametrize("seed", range(40))
def test_finite_ttc_implies_reachable_distance(generator, seed):
    spec = ScenarioSpec(
        template=("random", "crossing", "static_near")[seed % 3],
        n_pedestrians=4,
        av_speed=13.4,
        randomize_av_speed=True,
        seed=seed,
    )
    scenario = generator.generate(spec)
    config = ReachabilityConfig()
    for record in Criticality(config).annotate_frame(scenario.frames[0]):
        if math.isfinite(record.ttc):
            assert record.distance <= scenario.closing_distance(record.ttc, config.a_max) + 1e-9


def test_urban_population_leaves_unreachable_heatmap_cells_empty(generator):
    config = ReachabilityConfig()
    criticality = Criticality(config)
    records = []
    for seed in range(60):
        spec = ScenarioSpec(
            template=("random", "crossing", "static_near", "far_crowd")[seed % 4],
            n_pedestrians=5,
            av_speed=URBAN_SPEED_LIMIT,
            randomize_av_speed=True,
            seed=seed,
        )
        records += criticality.annotate_frame(generator.generate(spec).frames[0])
    assert any(math.isfinite(r.ttc) for r in records)

    heatmap = Evaluation().heatmap_counts(records)
    bound = ScenarioGenerator().generate(ScenarioSpec(av_speed=URBAN_SPEED_LIMIT, n_pedestrians=0))
    empty_cells = 0
    for i, dist_lo in enumerate(heatmap.dist_edges[:-1]):
        for j, ttc_hi in enumerate(heatmap.ttc_edges[1:]):
            if bound.closing_distance(ttc_hi, config.a_max) < dist_lo:
                assert heatmap.counts[i, j] == 0
                empty_cells += 1
    assert empty_cells > 0
