"""
Module: Brute-Force Oracles

Independent verifiers for the closed-form kernels:

- sampled_ttc: earliest collision over sampled constant-acceleration
  pedestrian trajectories on a fine time grid. Every sampled trajectory is
  admissible, so TTC_RSB must not exceed it by more than one grid step.
- rect_distance_sampling: point-to-rectangle distance over a dense grid.
- sweep_ap: AP from an explicit confidence-threshold sweep.
"""

import logging
import math

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from analysis.evaluation import iou
from analysis.geometry import OrientedRect, distances_points_to_rect, points_at_arclengths
from analysis.reachability import Reachability, ReachabilityConfig, frame_path

logger = logging.getLogger(__name__)

AUDIT_COLUMNS = ["frame_id", "pedestrian_id", "ttc_rsb", "sampled_ttc", "margin", "sound"]


class SampledTrajectoryConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_directions: int = Field(default=256, gt=0)
    n_magnitudes: int = Field(default=8, gt=0)
    dt_fine: float = Field(default=0.01, gt=0.0)
    seed: int = 0

    @property
    def n_accel_samples(self) -> int:
        return self.n_directions * self.n_magnitudes

    def accelerations(self, a_max: float) -> np.ndarray:
        """
        Constant accelerations with |a| <= a_max: a seeded rotation of an even
        direction fan times evenly spaced magnitudes, plus a = 0.
        """
        rng = np.random.default_rng(self.seed)
        offset = rng.uniform(0.0, 2.0 * math.pi / self.n_directions)
        angles = offset + np.arange(self.n_directions) * 2.0 * math.pi / self.n_directions
        magnitudes = a_max * np.arange(1, self.n_magnitudes + 1) / self.n_magnitudes
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        samples = (magnitudes[:, None, None] * directions[None, :, :]).reshape(-1, 2)
        return np.vstack([np.zeros((1, 2)), samples])


class TrajectoryOracle:
    """
    Attributes:
        config (SampledTrajectoryConfig)

    Methods:
        sampled_ttc: Earliest sampled collision time of one pedestrian.
        rect_distance_sampling: Grid-sampled distance from a point to a rectangle.
        audit_scene: Compare TTC_RSB with sampled_ttc for every pedestrian.
    """

    def __init__(self, config: SampledTrajectoryConfig = None):
        self.config = config or SampledTrajectoryConfig()

    def sampled_ttc(self, av, path, pedestrian, a_max: float, horizon: float) -> float:
        """
        First fine-grid time at which any sampled pedestrian disc (body radius
        only) touches the AV footprint moving at constant speed along ``path``.

        Returns:
            float: time in seconds, ``math.inf`` if no sample collides.
        """
        dt = self.config.dt_fine
        times = np.arange(0, int(math.floor(horizon / dt + 1e-9)) + 1) * dt
        centers, headings = points_at_arclengths(path, av.arc_offset + av.speed * times)

        accelerations = self.config.accelerations(a_max)
        p0 = np.asarray(pedestrian.position, dtype=float)
        v0 = np.asarray(pedestrian.velocity, dtype=float)

        half_length, half_width = av.footprint_length / 2.0, av.footprint_width / 2.0
        for k, t in enumerate(times):
            positions = p0 + v0 * t + 0.5 * accelerations * t * t
            rect = OrientedRect(tuple(centers[k]), half_length, half_width, float(headings[k]))
            if np.any(distances_points_to_rect(positions, rect) <= pedestrian.body_radius):
                return float(t)
        return math.inf

    @staticmethod
    def rect_distance_sampling(point, rect: OrientedRect, grid: float = 1e-2) -> float:
        """Minimum distance from ``point`` to a grid of points covering ``rect``."""
        nx = int(math.ceil(2.0 * rect.half_length / grid)) + 1
        ny = int(math.ceil(2.0 * rect.half_width / grid)) + 1
        lx, ly = np.meshgrid(
            np.linspace(-rect.half_length, rect.half_length, nx),
            np.linspace(-rect.half_width, rect.half_width, ny),
        )
        c, s = math.cos(rect.heading), math.sin(rect.heading)
        wx = rect.center[0] + lx * c - ly * s
        wy = rect.center[1] + lx * s + ly * c
        return float(np.min(np.hypot(wx - point[0], wy - point[1])))

    def audit_scene(self, frames, reachability_config: ReachabilityConfig) -> pd.DataFrame:
        """
        Returns:
            pandas.DataFrame: one row per (frame, pedestrian) with ``margin`` =
            sampled_ttc + dt - ttc_rsb and ``sound`` = margin >= 0.
        """
        reachability = Reachability(reachability_config)
        rows = []
        for frame in sorted(frames, key=lambda f: f.frame_id):
            path = frame_path(frame)
            results = {r.pedestrian_id: r for r in reachability.annotate_frame_ttc(frame)}
            for pedestrian in sorted(frame.pedestrians, key=lambda p: p.id):
                ttc_rsb = results[pedestrian.id].ttc
                sampled = self.sampled_ttc(
                    frame.av, path, pedestrian, reachability_config.a_max, reachability_config.horizon
                )
                if math.isinf(sampled):
                    margin = math.inf
                else:
                    margin = sampled + reachability_config.dt - ttc_rsb
                sound = margin >= -1e-9
                if not sound:
                    logger.error(
                        "TTC_RSB exceeds sampled collision time",
                        extra={
                            "frame_id": frame.frame_id,
                            "pedestrian_id": pedestrian.id,
                            "ttc_rsb": ttc_rsb,
                            "sampled_ttc": sampled,
                        },
                    )
                rows.append(
                    {
                        "frame_id": frame.frame_id,
                        "pedestrian_id": pedestrian.id,
                        "ttc_rsb": ttc_rsb,
                        "sampled_ttc": sampled,
                        "margin": margin,
                        "sound": sound,
                    }
                )
        return pd.DataFrame(rows, columns=AUDIT_COLUMNS)


def sweep_ap(dets, gts, iou_threshold: float = 0.5) -> float:
    """
    AP by sweeping every distinct confidence as a threshold, re-matching the
    surviving detections from scratch each time, then integrating the
    precision envelope over the recall steps. Intended for small instances.
    """
    if not gts:
        return None
    thresholds = sorted({d.confidence for d in dets}, reverse=True)
    points = []
    for threshold in thresholds:
        kept = [d for d in dets if d.confidence >= threshold]
        tp = 0
        for frame_id in sorted({d.frame_id for d in kept}):
            frame_dets = sorted(
                (d for d in kept if d.frame_id == frame_id),
                key=lambda d: -d.confidence,
            )
            frame_gts = [g for g in gts if g.frame_id == frame_id]
            free = list(range(len(frame_gts)))
            for det in frame_dets:
                scored = [(iou(det.box, frame_gts[j].box), -j) for j in free]
                if scored:
                    best_iou, neg_j = max(scored)
                    if best_iou >= iou_threshold:
                        free.remove(-neg_j)
                        tp += 1
        points.append((tp / len(gts), tp / len(kept)))

    ap, previous_recall = 0.0, 0.0
    for k, (recall, _) in enumerate(points):
        if recall > previous_recall:
            best_precision = max(p for _, p in points[k:])
            ap += (recall - previous_recall) * best_precision
            previous_recall = recall
    return ap
