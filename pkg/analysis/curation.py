"""
Module: 2D Annotation Curation

Projects ground-truth cuboids into the front camera, discards cuboids whose
centre lies outside the camera's horizontal field of view, and joins the
surviving boxes with their criticality annotation.

Camera frame convention: x right, y down, z forward (optical axis).
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from analysis.criticality import Zone
from analysis.geometry import OrientedRect
from errors import CalibrationError, MissingAnnotationError, SceneFormatError

logger = logging.getLogger(__name__)

_BEARING_TOLERANCE = 1e-12

OUTSIDE_FOV = "outside_fov"
BEHIND_CAMERA = "behind_camera"
DEGENERATE = "degenerate_projection"


@dataclass(frozen=True)
class Curated2DBox:
    pedestrian_id: str
    frame_id: str
    box: Tuple[float, float, float, float]
    diagonal_px: float
    visibility_bin: int
    kappa: float
    zone: Zone
    ttc: float = math.inf
    distance: float = 0.0


@dataclass(frozen=True)
class DiscardEntry:
    frame_id: str
    pedestrian_id: str
    reason: str


@dataclass(frozen=True)
class CurationResult:
    boxes: list
    discarded: list


def cuboid_corners(cuboid) -> np.ndarray:
    """The 8 corners of a cuboid in world coordinates, yaw about the world z axis."""
    length, width, height = cuboid.dimensions
    x, y, z = cuboid.center
    base = OrientedRect((x, y), length / 2.0, width / 2.0, cuboid.yaw).corners()
    return np.vstack([np.column_stack([base, np.full(4, z + dz)]) for dz in (-height / 2.0, height / 2.0)])


def to_camera(points: np.ndarray, camera) -> np.ndarray:
    homogeneous = np.hstack([points, np.ones((len(points), 1))])
    return (camera.world_to_camera @ homogeneous.T).T[:, :3]


class Curation:
    """
    Methods:
        project_cuboid: 2D pixel box of a cuboid, or None.
        fov_filter: Whether a cuboid centre lies inside the horizontal FOV.
        curate_frame: Curated boxes of a frame plus a discard report.
    """

    def project_cuboid(self, cuboid, camera) -> Optional[Tuple[float, float, float, float]]:
        """
        Hull of the projected corners in front of the camera, clipped to the image.

        Raises:
            CalibrationError: for singular intrinsics.
        """
        intrinsics = camera.K
        if abs(np.linalg.det(intrinsics)) < 1e-12:
            raise CalibrationError("camera intrinsics matrix is singular")

        corners = to_camera(cuboid_corners(cuboid), camera)
        corners = corners[corners[:, 2] > 0]
        if len(corners) == 0:
            return None

        pixels = (intrinsics @ corners.T).T
        pixels = pixels[:, :2] / pixels[:, 2:3]
        x_min = min(max(float(pixels[:, 0].min()), 0.0), camera.image_width)
        x_max = min(max(float(pixels[:, 0].max()), 0.0), camera.image_width)
        y_min = min(max(float(pixels[:, 1].min()), 0.0), camera.image_height)
        y_max = min(max(float(pixels[:, 1].max()), 0.0), camera.image_height)
        if not (x_min < x_max and y_min < y_max):
            return None
        return (x_min, y_min, x_max, y_max)

    def fov_filter(self, cuboid, camera) -> bool:
        """Horizontal bearing of the cuboid centre within +/- fov_half_angle, inclusive."""
        x, _, z = to_camera(np.asarray([cuboid.center], dtype=float), camera)[0]
        bearing = math.atan2(x, z)
        return abs(bearing) <= camera.fov_half_angle + _BEARING_TOLERANCE

    def curate_frame(self, frame, records) -> CurationResult:
        """
        Raises:
            MissingAnnotationError: if a cuboid has no criticality record.
        """
        by_id = {r.pedestrian_id: r for r in records if r.frame_id == frame.frame_id}
        boxes, discarded = [], []
        for cuboid in sorted(frame.cuboids, key=lambda c: c.pedestrian_id):
            record = by_id.get(cuboid.pedestrian_id)
            if record is None:
                raise MissingAnnotationError(
                    f"frame {frame.frame_id!r}: no criticality record for "
                    f"pedestrian {cuboid.pedestrian_id!r}"
                )

            if not self.fov_filter(cuboid, frame.camera):
                center_depth = to_camera(np.asarray([cuboid.center]), frame.camera)[0, 2]
                reason = BEHIND_CAMERA if center_depth <= 0 else OUTSIDE_FOV
                discarded.append(DiscardEntry(frame.frame_id, cuboid.pedestrian_id, reason))
                continue

            box = self.project_cuboid(cuboid, frame.camera)
            if box is None:
                discarded.append(DiscardEntry(frame.frame_id, cuboid.pedestrian_id, DEGENERATE))
                continue

            boxes.append(
                Curated2DBox(
                    pedestrian_id=cuboid.pedestrian_id,
                    frame_id=frame.frame_id,
                    box=box,
                    diagonal_px=math.hypot(box[2] - box[0], box[3] - box[1]),
                    visibility_bin=cuboid.visibility_bin,
                    kappa=record.kappa,
                    zone=record.zone,
                    ttc=record.ttc,
                    distance=record.distance,
                )
            )

        for entry in discarded:
            logger.info(
                "discarded cuboid",
                extra={
                    "frame_id": entry.frame_id,
                    "pedestrian_id": entry.pedestrian_id,
                    "reason": entry.reason,
                },
            )
        return CurationResult(boxes=boxes, discarded=discarded)


def discard_frame(discarded) -> pd.DataFrame:
    return pd.DataFrame(
        [asdict(d) for d in discarded], columns=["frame_id", "pedestrian_id", "reason"]
    )


def dump_curated(frame_ids, boxes, discarded, path, config: dict, stamp: str = None) -> None:
    """
    Write a curated-box file: every frame id of the source scene, the boxes in
    (frame_id, pedestrian_id) order and the discard report.
    """
    payload = {"config": config}
    if stamp:
        payload["generated_at"] = stamp
    payload["frames"] = sorted(frame_ids)
    payload["boxes"] = [
        {
            **asdict(b),
            "box": list(b.box),
            "zone": b.zone.value,
            "ttc": None if math.isinf(b.ttc) else b.ttc,
        }
        for b in sorted(boxes, key=lambda b: (b.frame_id, b.pedestrian_id))
    ]
    payload["discarded"] = [
        asdict(d) for d in sorted(discarded, key=lambda d: (d.frame_id, d.pedestrian_id))
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_curated(path):
    """
    Returns:
        tuple: (frame ids, list[Curated2DBox])
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        boxes = [
            Curated2DBox(
                pedestrian_id=row["pedestrian_id"],
                frame_id=row["frame_id"],
                box=tuple(float(v) for v in row["box"]),
                diagonal_px=float(row["diagonal_px"]),
                visibility_bin=int(row["visibility_bin"]),
                kappa=float(row["kappa"]),
                zone=Zone(row["zone"]),
                ttc=math.inf if row.get("ttc") is None else float(row["ttc"]),
                distance=float(row.get("distance", 0.0)),
            )
            for row in data["boxes"]
        ]
        frame_ids = list(data["frames"])
    except FileNotFoundError as exc:
        raise SceneFormatError(path, "file does not exist") from exc
    except UnicodeDecodeError as exc:
        raise SceneFormatError(path, f"not valid UTF-8 at byte {exc.start}") from exc
    except json.JSONDecodeError as exc:
        raise SceneFormatError(path, exc.msg, line=exc.lineno, column=exc.colno) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(path, f"malformed curated-box file: {exc}") from exc
    return frame_ids, boxes
