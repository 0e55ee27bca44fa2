"""
Command line

Subcommands tie the pipeline together: annotate -> curate -> evaluate, plus
end-to-end, loss-table, heatmap and audit-ttc. File formats are described in
``docs/formats.md``.

Exit codes: 0 success, 1 input or config error, 2 usage error,
3 soundness violation found by audit-ttc.
"""

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from analysis.criticality import (
    Criticality,
    CriticalityMode,
    DistanceReference,
    dump_records,
    load_records,
    records_frame,
    zone_summary,
)
from analysis.curation import Curation, discard_frame, dump_curated, load_curated
from analysis.evaluation import Evaluation, compare_reports
from analysis.loss import emit_loss_curves
from analysis.oracle import SampledTrajectoryConfig, TrajectoryOracle
from analysis.scenario import ScenarioGenerator, ScenarioSpec
from dataset import dump_scene, load_detections, load_scene
from errors import ConfigError, SafetyLossError
from settings import RunConfig, configure_logging
from settings.run_config import DEFAULT

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOUND = 3

COMMANDS = "annotate,curate,evaluate,end-to-end,loss-table,heatmap,audit-ttc"
LOSS_TABLE_KAPPAS = (0.0, 0.5, 1.0)


def float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def common_parser() -> argparse.ArgumentParser:
    """Global and config flags shared by every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    general = common.add_argument_group("general")
    general.add_argument("--config", default=None, help="YAML or JSON config file")
    general.add_argument("--jobs", type=int, default=1, help="worker processes for per-frame work")
    general.add_argument("--explain-config", action="store_true", help="print every config value and its source")
    general.add_argument("--stamp", action="store_true", help="embed a generation timestamp in output files")
    general.add_argument("--log-level", default="WARNING")
    general.add_argument("--log-json", action="store_true", help="log JSON lines to stderr")

    config = common.add_argument_group("config")
    config.add_argument("--dt", type=float)
    config.add_argument("--horizon", type=float)
    config.add_argument("--a-max", type=float)
    config.add_argument("--av-swept", action=argparse.BooleanOptionalAction, default=None)
    config.add_argument("--d-max", type=float)
    config.add_argument("--ttc-max", type=float)
    config.add_argument("--ttc-crit", type=float)
    config.add_argument("--d-crit", type=float)
    config.add_argument("--mode", choices=[m.value for m in CriticalityMode])
    config.add_argument("--distance-reference", choices=[r.value for r in DistanceReference])
    config.add_argument("--alpha", type=float)
    config.add_argument("--gamma", type=float)
    config.add_argument("--kappa", type=float)
    config.add_argument("--eps", type=float)
    config.add_argument("--iou-threshold", type=float)
    config.add_argument("--small-max-px", type=float)
    config.add_argument("--mid-max-px", type=float)
    config.add_argument("--ttc-edges", type=float_list)
    config.add_argument("--dist-edges", type=float_list)
    config.add_argument("--target-class")
    return common


CONFIG_FLAGS = (
    "dt",
    "horizon",
    "a_max",
    "av_swept",
    "d_max",
    "ttc_max",
    "ttc_crit",
    "d_crit",
    "mode",
    "distance_reference",
    "alpha",
    "gamma",
    "kappa",
    "eps",
    "iou_threshold",
    "small_max_px",
    "mid_max_px",
    "ttc_edges",
    "dist_edges",
    "target_class",
)


def build_arg_parser() -> argparse.ArgumentParser:
    common = common_parser()
    parser = argparse.ArgumentParser(
        prog="safety-eval",
        description="Reachability-based pedestrian criticality, safety-adapted focal loss and zone-based evaluation.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar=f"{{{COMMANDS}}}")

    annotate = commands.add_parser("annotate", parents=[common], help="criticality records for a scene")
    annotate.add_argument("scene")
    annotate.add_argument("--out", required=True, help="annotation file (JSON)")
    annotate.add_argument("--csv", default=None, help="also write the records as CSV")

    curate = commands.add_parser("curate", parents=[common], help="2D boxes from 3D cuboids")
    curate.add_argument("scene")
    curate.add_argument("--records", default=None, help="annotation file; computed when omitted")
    curate.add_argument("--out", required=True, help="curated-box file (JSON)")
    curate.add_argument("--discards", default=None, help="discard report (CSV)")

    evaluate = commands.add_parser("evaluate", parents=[common], help="zone-based evaluation of detections")
    evaluate.add_argument("curated")
    evaluate.add_argument("detections", nargs="+")
    evaluate.add_argument("--out", required=True, help="report file (JSON)")
    evaluate.add_argument("--heatmap-csv", default=None)
    evaluate.add_argument("--visibility-csv", default=None)

    end_to_end = commands.add_parser("end-to-end", parents=[common], help="annotate, curate and evaluate")
    end_to_end.add_argument("scene")
    end_to_end.add_argument("detections", nargs="+")
    end_to_end.add_argument("--work-dir", required=True)

    loss_table = commands.add_parser("loss-table", parents=[common], help="FL and FL_kappa over p")
    loss_table.add_argument("--kappas", type=float_list, default=None, help="default 0,0.5,1")
    loss_table.add_argument("--baseline-gammas", type=float_list, default=())
    loss_table.add_argument("--p-min", type=float, default=0.1)
    loss_table.add_argument("--p-max", type=float, default=0.999)
    loss_table.add_argument("--steps", type=int, default=200)
    loss_table.add_argument("--out", default=None, help="CSV file; stdout when omitted")

    heatmap = commands.add_parser("heatmap", parents=[common], help="(TTC, distance) counts of an annotation file")
    heatmap.add_argument("records")
    heatmap.add_argument("--out", default=None, help="CSV file; stdout when omitted")

    audit = commands.add_parser("audit-ttc", parents=[common], help="check TTC_RSB against sampled trajectories")
    audit.add_argument("scene")
    audit.add_argument("--out", default=None, help="CSV file; stdout when omitted")
    audit.add_argument("--directions", type=int, default=256)
    audit.add_argument("--magnitudes", type=int, default=8)
    audit.add_argument("--dt-fine", type=float, default=0.01)
    audit.add_argument("--seed", type=int, default=0)

    generate = commands.add_parser("generate", parents=[common], help=argparse.SUPPRESS)
    generate.add_argument("--template", default="random")
    generate.add_argument("--n-pedestrians", type=int, default=1)
    generate.add_argument("--av-speed", type=float, default=10.0)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--n-frames", type=int, default=1)
    generate.add_argument("--successor-turn", action="store_true")
    generate.add_argument("--out", required=True, help="scene file (JSON)")
    generate.add_argument("--metadata", default=None, help="per-pedestrian ground truth (JSON)")
    return parser


def parallel_map(fn, items, jobs: int) -> list:
    """``map`` over worker processes when ``jobs > 1``; result order follows ``items``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def annotate_frame(frame, reachability_config, criticality_config):
    return Criticality(reachability_config, criticality_config).annotate_frame(frame)


def audit_frame(frame, reachability_config, oracle_config):
    return TrajectoryOracle(oracle_config).audit_scene([frame], reachability_config)


def write_text(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info("wrote file", extra={"path": str(path)})


def table_csv(table: pd.DataFrame, float_format: str = None) -> str:
    """CSV text with infinite values written as empty cells."""
    return table.replace([np.inf, -np.inf], np.nan).to_csv(index=False, float_format=float_format)


class Pipeline:
    """
    One resolved run: the config plus the per-stage commands.

    Methods:
        annotate: Criticality records for every pedestrian of a scene.
        curate: Curated 2D boxes and the discard report.
        evaluate: EvalReport per detection file.
    """

    def __init__(self, config: RunConfig, jobs: int = 1, stamp: Optional[str] = None):
        self.config = config
        self.jobs = jobs
        self.stamp = stamp

    def annotate(self, frames) -> list:
        worker = partial(
            annotate_frame,
            reachability_config=self.config.reachability,
            criticality_config=self.config.criticality,
        )
        per_frame = parallel_map(worker, frames, self.jobs)
        records = [r for frame_records in per_frame for r in frame_records]
        return sorted(records, key=lambda r: (r.frame_id, r.pedestrian_id))

    def curate(self, frames, records):
        curation = Curation()
        boxes, discarded = [], []
        for frame in sorted(frames, key=lambda f: f.frame_id):
            result = curation.curate_frame(frame, records)
            boxes.extend(result.boxes)
            discarded.extend(result.discarded)
        return boxes, discarded

    def evaluate(self, frame_ids, boxes, detection_paths) -> list:
        evaluation = Evaluation(self.config.evaluation)
        reports = []
        for path in detection_paths:
            detections = load_detections(path)
            reports.append(evaluation.evaluate(detections, boxes, frame_ids=frame_ids, label=Path(path).stem))
        return reports

    def dump_reports(self, reports, path) -> None:
        payload = {"config": self.config.to_dict()}
        if self.stamp:
            payload["generated_at"] = self.stamp
        payload["reports"] = [r.to_dict() for r in reports]
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        logger.info("wrote file", extra={"path": str(path)})

    def write_evaluation_tables(self, reports, heatmap_path=None, visibility_path=None) -> None:
        # the heatmap depends on the ground truth only
        if heatmap_path and reports:
            write_text(table_csv(reports[0].heatmap.to_frame()), heatmap_path)
        if visibility_path:
            rows = [
                {"detector": report.label, "visibility_bin": int(bin_), "zone": zone, "recall": recall}
                for report in reports
                for bin_, row in report.visibility_recall.iterrows()
                for zone, recall in row.items()
            ]
            table = pd.DataFrame(rows, columns=["detector", "visibility_bin", "zone", "recall"])
            write_text(table_csv(table), visibility_path)


def print_zone_summary(records) -> None:
    sys.stdout.write(table_csv(zone_summary(records), float_format="%.4f"))


def print_table_rows(reports) -> None:
    sys.stdout.write(table_csv(compare_reports(reports), float_format="%.4f"))


def run_annotate(args, pipeline: Pipeline) -> int:
    records = pipeline.annotate(load_scene(args.scene))
    dump_records(records, args.out, pipeline.config.to_dict(), pipeline.stamp)
    if args.csv:
        write_text(table_csv(records_frame(records)), args.csv)
    print_zone_summary(records)
    return EXIT_OK


def run_curate(args, pipeline: Pipeline) -> int:
    frames = load_scene(args.scene)
    records = load_records(args.records) if args.records else pipeline.annotate(frames)
    boxes, discarded = pipeline.curate(frames, records)
    dump_curated([f.frame_id for f in frames], boxes, discarded, args.out, pipeline.config.to_dict(), pipeline.stamp)
    if args.discards:
        write_text(table_csv(discard_frame(discarded)), args.discards)
    sys.stdout.write(f"kept {len(boxes)} boxes, discarded {len(discarded)}\n")
    return EXIT_OK


def run_evaluate(args, pipeline: Pipeline) -> int:
    frame_ids, boxes = load_curated(args.curated)
    reports = pipeline.evaluate(frame_ids, boxes, args.detections)
    pipeline.dump_reports(reports, args.out)
    pipeline.write_evaluation_tables(reports, args.heatmap_csv, args.visibility_csv)
    print_table_rows(reports)
    return EXIT_OK


def run_end_to_end(args, pipeline: Pipeline) -> int:
    work_dir = Path(args.work_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    for path in args.detections:
        if not Path(path).is_file():
            raise ConfigError(f"{path}: detection file does not exist")

    frames = load_scene(args.scene)
    records = pipeline.annotate(frames)
    dump_records(records, work_dir / "records.json", pipeline.config.to_dict(), pipeline.stamp)
    write_text(table_csv(records_frame(records)), work_dir / "records.csv")

    boxes, discarded = pipeline.curate(frames, records)
    frame_ids = [f.frame_id for f in frames]
    dump_curated(frame_ids, boxes, discarded, work_dir / "curated.json", pipeline.config.to_dict(), pipeline.stamp)
    write_text(table_csv(discard_frame(discarded)), work_dir / "discarded.csv")

    reports = pipeline.evaluate(frame_ids, boxes, args.detections)
    pipeline.dump_reports(reports, work_dir / "report.json")
    pipeline.write_evaluation_tables(reports, work_dir / "heatmap.csv", work_dir / "visibility.csv")

    print_zone_summary(records)
    print_table_rows(reports)
    return EXIT_OK


def run_loss_table(args, pipeline: Pipeline) -> int:
    kappas = tuple(args.kappas) if args.kappas is not None else LOSS_TABLE_KAPPAS
    # a kappa set by file or flag always gets its own column
    configured = pipeline.config.loss.kappa
    if pipeline.config.provenance.get("loss.kappa", DEFAULT) != DEFAULT and configured not in kappas:
        kappas += (configured,)
    table = emit_loss_curves(
        pipeline.config.loss,
        kappas=kappas,
        steps=args.steps,
        p_min=args.p_min,
        p_max=args.p_max,
        baseline_gammas=args.baseline_gammas,
    )
    write_text(table_csv(table), args.out)
    return EXIT_OK


def run_heatmap(args, pipeline: Pipeline) -> int:
    counts = Evaluation(pipeline.config.evaluation).heatmap_counts(load_records(args.records))
    write_text(table_csv(counts.to_frame()), args.out)
    return EXIT_OK


def run_audit(args, pipeline: Pipeline) -> int:
    try:
        oracle_config = SampledTrajectoryConfig(
            n_directions=args.directions,
            n_magnitudes=args.magnitudes,
            dt_fine=args.dt_fine,
            seed=args.seed,
        )
    except ValidationError as exc:
        raise ConfigError(f"invalid oracle settings: {exc.errors()[0]['msg']}") from exc

    worker = partial(audit_frame, reachability_config=pipeline.config.reachability, oracle_config=oracle_config)
    tables = parallel_map(worker, sorted(load_scene(args.scene), key=lambda f: f.frame_id), pipeline.jobs)
    table = pd.concat(tables, ignore_index=True) if tables else TrajectoryOracle().audit_scene([], pipeline.config.reachability)
    write_text(table_csv(table), args.out)

    violations = int((~table["sound"].astype(bool)).sum())
    if violations:
        sys.stderr.write(f"error: {violations} soundness violation(s)\n")
        return EXIT_UNSOUND
    return EXIT_OK


def run_generate(args, pipeline: Pipeline) -> int:
    try:
        spec = ScenarioSpec(
            template=args.template,
            n_pedestrians=args.n_pedestrians,
            av_speed=args.av_speed,
            seed=args.seed,
            n_frames=args.n_frames,
            successor_turn=args.successor_turn,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(f"invalid scenario, {'.'.join(map(str, first['loc']))}: {first['msg']}") from exc

    scenario = ScenarioGenerator().generate(spec)
    dump_scene(scenario.frames, args.out)
    if args.metadata:
        truths = [
            {
                "frame_id": t.frame_id,
                "pedestrian_id": t.pedestrian_id,
                "distance": t.distance,
                "straight_line_ttc": (
                    None if t.straight_line_ttc is None or math.isinf(t.straight_line_ttc) else t.straight_line_ttc
                ),
            }
            for t in scenario.truths
        ]
        payload = {"spec": spec.model_dump(mode="json"), "pedestrians": truths}
        Path(args.metadata).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


HANDLERS = {
    "annotate": run_annotate,
    "curate": run_curate,
    "evaluate": run_evaluate,
    "end-to-end": run_end_to_end,
    "loss-table": run_loss_table,
    "heatmap": run_heatmap,
    "audit-ttc": run_audit,
    "generate": run_generate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_json)

    try:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        overrides = {key: getattr(args, key) for key in CONFIG_FLAGS}
        config = RunConfig.resolve(args.config, overrides)
        if args.explain_config:
            sys.stderr.write("\n".join(config.explain()) + "\n")
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if args.stamp else None
        return HANDLERS[args.command](args, Pipeline(config, args.jobs, stamp))
    except (SafetyLossError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
