"""
Module: Zone-Based Detector Evaluation

IoU matching of detections against curated ground truth, recall per safety
zone, overall precision, AP50 conditioned on box diagonal, recall per
(visibility, zone) cell and the (TTC, distance) heatmap.

Rates are ``None`` when their denominator is empty.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from analysis.criticality import ZONES, Zone
from errors import ConfigError, SceneValidationError

VISIBILITY_BINS = (1, 2, 3, 4)
SIZE_BINS = ("small", "mid", "large")
TABLE_COLUMNS = ["AP50", "AP_S", "AP_M", "AP_L", "Recall_C", "Recall_PC", "Recall_NC", "Precision"]


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    iou_threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    small_max_px: float = Field(default=150.0, gt=0.0)
    mid_max_px: float = Field(default=350.0, gt=0.0)
    ttc_edges: Tuple[float, ...] = tuple(0.5 * i for i in range(13))
    dist_edges: Tuple[float, ...] = tuple(float(d) for d in range(0, 45, 5))
    target_class: str = "pedestrian"

    @field_validator("ttc_edges", "dist_edges")
    @classmethod
    def _monotone(cls, edges):
        check_edges(edges)
        return edges

    @model_validator(mode="after")
    def _ordered_size_bins(self):
        if self.small_max_px >= self.mid_max_px:
            raise ValueError("small_max_px must be < mid_max_px")
        return self


def check_edges(edges) -> None:
    edges = list(edges)
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ConfigError(f"bin edges must be strictly increasing with at least 2 values, got {edges}")


@dataclass(frozen=True)
class MatchResult:
    pairs: list
    unmatched_gt: list
    unmatched_det: list


@dataclass(frozen=True)
class HeatmapCounts:
    """
    Attributes:
        counts (numpy.ndarray): (distance bins, TTC bins + 1); the last column
            holds TTC beyond the last edge, including +inf.
        distance_overflow (int): records beyond the last distance edge.
    """

    ttc_edges: Tuple[float, ...]
    dist_edges: Tuple[float, ...]
    counts: np.ndarray
    distance_overflow: int

    def to_frame(self) -> pd.DataFrame:
        """Tidy table: one row per cell plus one distance-overflow row."""
        ttc_bounds = list(zip(self.ttc_edges, self.ttc_edges[1:])) + [(self.ttc_edges[-1], math.inf)]
        rows = [
            {"dist_lo": d_lo, "dist_hi": d_hi, "ttc_lo": t_lo, "ttc_hi": t_hi, "count": int(self.counts[i, j])}
            for i, (d_lo, d_hi) in enumerate(zip(self.dist_edges, self.dist_edges[1:]))
            for j, (t_lo, t_hi) in enumerate(ttc_bounds)
        ]
        rows.append(
            {
                "dist_lo": self.dist_edges[-1],
                "dist_hi": math.inf,
                "ttc_lo": self.ttc_edges[0],
                "ttc_hi": math.inf,
                "count": self.distance_overflow,
            }
        )
        return pd.DataFrame(rows, columns=["dist_lo", "dist_hi", "ttc_lo", "ttc_hi", "count"])


@dataclass
class EvalReport:
    recall_c: Optional[float]
    recall_pc: Optional[float]
    recall_nc: Optional[float]
    precision: Optional[float]
    ap50: Optional[float]
    ap_small: Optional[float]
    ap_mid: Optional[float]
    ap_large: Optional[float]
    visibility_recall: pd.DataFrame
    heatmap: HeatmapCounts
    gt_counts: dict
    num_detections: int = 0
    label: str = ""

    def table_row(self) -> dict:
        values = [
            self.ap50,
            self.ap_small,
            self.ap_mid,
            self.ap_large,
            self.recall_c,
            self.recall_pc,
            self.recall_nc,
            self.precision,
        ]
        return dict(zip(TABLE_COLUMNS, values))

    def to_dict(self) -> dict:
        visibility = {
            str(bin_): {
                zone: (None if pd.isna(value) else float(value))
                for zone, value in row.items()
            }
            for bin_, row in self.visibility_recall.iterrows()
        }
        return {
            "label": self.label,
            "num_detections": self.num_detections,
            **self.table_row(),
            "gt_counts": self.gt_counts,
            "visibility_recall": visibility,
            "heatmap": {
                "ttc_edges": list(self.heatmap.ttc_edges),
                "dist_edges": list(self.heatmap.dist_edges),
                "counts": self.heatmap.counts.tolist(),
                "distance_overflow": self.heatmap.distance_overflow,
            },
        }


def iou(a, b) -> float:
    ix = max(min(a[2], b[2]) - max(a[0], b[0]), 0.0)
    iy = max(min(a[3], b[3]) - max(a[1], b[1]), 0.0)
    intersection = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - intersection
    return intersection / union if union > 0 else 0.0


def iou_matrix(det_boxes, gt_boxes) -> np.ndarray:
    dets = np.asarray(det_boxes, dtype=float).reshape(-1, 4)
    gts = np.asarray(gt_boxes, dtype=float).reshape(-1, 4)
    ix = np.clip(
        np.minimum(dets[:, None, 2], gts[None, :, 2]) - np.maximum(dets[:, None, 0], gts[None, :, 0]), 0, None
    )
    iy = np.clip(
        np.minimum(dets[:, None, 3], gts[None, :, 3]) - np.maximum(dets[:, None, 1], gts[None, :, 1]), 0, None
    )
    intersection = ix * iy
    area_d = (dets[:, 2] - dets[:, 0]) * (dets[:, 3] - dets[:, 1])
    area_g = (gts[:, 2] - gts[:, 0]) * (gts[:, 3] - gts[:, 1])
    union = area_d[:, None] + area_g[None, :] - intersection
    return np.divide(intersection, union, out=np.zeros_like(intersection), where=union > 0)


def voc_ap(recall: np.ndarray, precision: np.ndarray) -> float:
    """Area under the precision envelope, all-point interpolation."""
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    changes = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[changes + 1] - mrec[changes]) * mpre[changes + 1]))


def group_by_frame(items) -> dict:
    """Items per frame_id, input order preserved."""
    grouped = {}
    for item in items:
        grouped.setdefault(item.frame_id, []).append(item)
    return grouped


class Evaluation:
    """
    Attributes:
        config (EvaluationConfig)

    Methods:
        match: Greedy confidence-ordered matching within one frame.
        zone_recall: Recall per safety zone.
        ap50_binned: AP50 overall and per box-diagonal bin.
        heatmap_counts: Pedestrian counts over (TTC, distance) bins.
        visibility_breakdown: Recall per (visibility bin, zone).
        evaluate: Full EvalReport.
    """

    def __init__(self, config: EvaluationConfig = None):
        self.config = config or EvaluationConfig()

    def match(self, dets, gts, iou_threshold: float = None) -> MatchResult:
        """
        Detections in descending confidence (input order on ties) each take the
        unmatched ground truth of highest IoU >= threshold, lowest index on ties.
        """
        threshold = self.config.iou_threshold if iou_threshold is None else iou_threshold
        ious = iou_matrix([d.box for d in dets], [g.box for g in gts])
        order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))

        taken = np.zeros(len(gts), dtype=bool)
        pairs, unmatched_det = [], []
        for i in order:
            if len(gts) == 0:
                unmatched_det.append(i)
                continue
            candidates = np.where(taken, -1.0, ious[i])
            j = int(np.argmax(candidates))
            if candidates[j] >= threshold:
                taken[j] = True
                pairs.append((i, j, float(ious[i, j])))
            else:
                unmatched_det.append(i)

        unmatched_gt = [j for j in range(len(gts)) if not taken[j]]
        return MatchResult(pairs=pairs, unmatched_gt=unmatched_gt, unmatched_det=sorted(unmatched_det))

    def size_bin(self, diagonal_px: float) -> str:
        if diagonal_px <= self.config.small_max_px:
            return "small"
        if diagonal_px <= self.config.mid_max_px:
            return "mid"
        return "large"

    def _relevant(self, dets) -> list:
        return [d for d in dets if d.class_ == self.config.target_class]

    def match_frames(self, dets, gts) -> dict:
        """MatchResult per frame_id over the union of frames in both lists."""
        dets_by_frame = group_by_frame(self._relevant(dets))
        gts_by_frame = group_by_frame(gts)
        frame_ids = sorted(set(dets_by_frame) | set(gts_by_frame))
        return {
            frame_id: self.match(dets_by_frame.get(frame_id, []), gts_by_frame.get(frame_id, []))
            for frame_id in frame_ids
        }

    def gt_table(self, matches: dict, gts) -> pd.DataFrame:
        """One row per ground-truth box with its zone, visibility, size bin and match flag."""
        rows = []
        for frame_id, frame_gts in group_by_frame(gts).items():
            result = matches.get(frame_id)
            matched = {j for _, j, _ in result.pairs} if result else set()
            for j, gt in enumerate(frame_gts):
                rows.append(
                    {
                        "frame_id": frame_id,
                        "pedestrian_id": gt.pedestrian_id,
                        "zone": Zone(gt.zone).value,
                        "visibility_bin": gt.visibility_bin,
                        "size_bin": self.size_bin(gt.diagonal_px),
                        "matched": j in matched,
                    }
                )
        columns = ["frame_id", "pedestrian_id", "zone", "visibility_bin", "size_bin", "matched"]
        return pd.DataFrame(rows, columns=columns)

    def zone_recall(self, matches: dict, gts) -> dict:
        """
        Returns:
            dict: zone value -> recall, ``None`` for a zone without ground truth.
        """
        table = self.gt_table(matches, gts)
        grouped = table.groupby("zone")["matched"].agg(["sum", "count"])
        recall = {}
        for zone in ZONES:
            if zone.value in grouped.index and grouped.loc[zone.value, "count"] > 0:
                recall[zone.value] = float(grouped.loc[zone.value, "sum"] / grouped.loc[zone.value, "count"])
            else:
                recall[zone.value] = None
        return recall

    def detection_table(self, dets, gts) -> pd.DataFrame:
        """One row per relevant detection, sorted by descending confidence."""
        relevant = self._relevant(dets)
        dets_by_frame = group_by_frame(relevant)
        gts_by_frame = group_by_frame(gts)
        rows = []
        for frame_id, frame_dets in dets_by_frame.items():
            frame_gts = gts_by_frame.get(frame_id, [])
            result = self.match(frame_dets, frame_gts)
            matched_gt = {i: j for i, j, _ in result.pairs}
            for i, det in enumerate(frame_dets):
                j = matched_gt.get(i)
                rows.append(
                    {
                        "frame_id": frame_id,
                        "confidence": det.confidence,
                        "tp": j is not None,
                        "gt_size_bin": None if j is None else self.size_bin(frame_gts[j].diagonal_px),
                    }
                )
        table = pd.DataFrame(rows, columns=["frame_id", "confidence", "tp", "gt_size_bin"])
        return table.sort_values("confidence", ascending=False, kind="mergesort").reset_index(drop=True)

    @staticmethod
    def _average_precision(table: pd.DataFrame, num_gt: int) -> Optional[float]:
        if num_gt == 0:
            return None
        if table.empty:
            return 0.0
        tp = np.cumsum(table["tp"].to_numpy(dtype=float))
        fp = np.cumsum((~table["tp"]).to_numpy(dtype=float))
        return voc_ap(tp / num_gt, tp / np.maximum(tp + fp, np.finfo(float).eps))

    def ap50_binned(self, dets, gts) -> tuple:
        """
        AP at the configured IoU threshold, overall and for the small / mid /
        large diagonal bins. A bin keeps its own ground truth; detections matched
        to ground truth of another bin are left out of that bin.

        Returns:
            tuple: (ap50, ap_small, ap_mid, ap_large)
        """
        table = self.detection_table(dets, gts)
        diagonal_bins = pd.Series([self.size_bin(g.diagonal_px) for g in gts], dtype=object)
        results = [self._average_precision(table, len(gts))]
        for size in SIZE_BINS:
            in_bin = table[(~table["tp"]) | (table["gt_size_bin"] == size)]
            results.append(self._average_precision(in_bin, int((diagonal_bins == size).sum())))
        return tuple(results)

    def heatmap_counts(self, records, ttc_edges=None, dist_edges=None) -> HeatmapCounts:
        """
        2D histogram over (distance, TTC). Bins are left-closed; the last edge
        belongs to the last bin and values below the first edge to the first.

        Raises:
            ConfigError: for edges that are not strictly increasing.
        """
        ttc_edges = tuple(float(e) for e in (self.config.ttc_edges if ttc_edges is None else ttc_edges))
        dist_edges = tuple(float(e) for e in (self.config.dist_edges if dist_edges is None else dist_edges))
        check_edges(ttc_edges)
        check_edges(dist_edges)

        n_ttc, n_dist = len(ttc_edges) - 1, len(dist_edges) - 1
        counts = np.zeros((n_dist, n_ttc + 1), dtype=int)
        overflow = 0
        for record in records:
            if record.distance > dist_edges[-1]:
                overflow += 1
                continue
            row = min(max(int(np.searchsorted(dist_edges, record.distance, side="right")) - 1, 0), n_dist - 1)
            if record.ttc > ttc_edges[-1]:
                column = n_ttc
            else:
                column = min(max(int(np.searchsorted(ttc_edges, record.ttc, side="right")) - 1, 0), n_ttc - 1)
            counts[row, column] += 1
        return HeatmapCounts(ttc_edges, dist_edges, counts, overflow)

    def visibility_counts(self, matches: dict, gts) -> pd.DataFrame:
        """Matched and total ground-truth counts per (visibility bin, zone)."""
        table = self.gt_table(matches, gts)
        counts = table.groupby(["visibility_bin", "zone"])["matched"].agg(["sum", "count"])
        full_index = pd.MultiIndex.from_product(
            [VISIBILITY_BINS, [z.value for z in ZONES]], names=["visibility_bin", "zone"]
        )
        return counts.reindex(full_index, fill_value=0).astype(int)

    def visibility_breakdown(self, matches: dict, gts) -> pd.DataFrame:
        """
        Returns:
            pandas.DataFrame: 4 x 3 recall table (visibility bin x zone), NaN
            where a cell has no ground truth.
        """
        counts = self.visibility_counts(matches, gts)
        recall = (counts["sum"] / counts["count"].where(counts["count"] > 0)).unstack("zone")
        return recall.reindex(index=list(VISIBILITY_BINS), columns=[z.value for z in ZONES])

    def evaluate(self, dets, gts, frame_ids=None, label: str = "") -> EvalReport:
        """
        Raises:
            SceneValidationError: if a detection references a frame absent from ``frame_ids``.
        """
        if frame_ids is not None:
            known = set(frame_ids)
            for det in dets:
                if det.frame_id not in known:
                    raise SceneValidationError(
                        det.frame_id, "frame_id", "detection frame not present in the curated-box file"
                    )

        matches = self.match_frames(dets, gts)
        recall = self.zone_recall(matches, gts)
        ap50, ap_small, ap_mid, ap_large = self.ap50_binned(dets, gts)

        relevant = self._relevant(dets)
        true_positives = sum(len(m.pairs) for m in matches.values())
        precision = true_positives / len(relevant) if relevant else None

        gt_zones = pd.Series([Zone(g.zone).value for g in gts], dtype=object)
        gt_counts = {zone.value: int((gt_zones == zone.value).sum()) for zone in ZONES}

        return EvalReport(
            recall_c=recall[Zone.C.value],
            recall_pc=recall[Zone.PC.value],
            recall_nc=recall[Zone.NC.value],
            precision=precision,
            ap50=ap50,
            ap_small=ap_small,
            ap_mid=ap_mid,
            ap_large=ap_large,
            visibility_recall=self.visibility_breakdown(matches, gts),
            heatmap=self.heatmap_counts(gts),
            gt_counts=gt_counts,
            num_detections=len(relevant),
            label=label,
        )


def compare_reports(reports) -> pd.DataFrame:
    """Benchmark comparison table, one row per labelled report."""
    rows = [{"detector": r.label, **r.table_row()} for r in reports]
    return pd.DataFrame(rows, columns=["detector", *TABLE_COLUMNS])
