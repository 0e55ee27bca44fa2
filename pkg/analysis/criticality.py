"""
Module: Per-Pedestrian Criticality

Composes the collision criticality kappa_c (from TTC_RSB) and the distance
criticality kappa_d into kappa in [0, 1] and assigns the safety zones
C (critical), PC (potentially critical) and NC (non-critical).
"""

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from analysis.geometry import distance_point_to_rect
from analysis.reachability import Reachability, ReachabilityConfig, av_footprint
from errors import DomainError, SceneFormatError


class Zone(str, Enum):
    C = "C"
    PC = "PC"
    NC = "NC"


ZONES = (Zone.C, Zone.PC, Zone.NC)


class CriticalityMode(str, Enum):
    composed = "composed"
    collision_only = "collision_only"
    distance_only = "distance_only"


class DistanceReference(str, Enum):
    footprint = "footprint"
    center = "center"


class CriticalityConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    d_max: float = Field(default=40.0, gt=0.0)
    ttc_max: float = Field(default=6.0, gt=0.0)
    ttc_crit: float = Field(default=1.7, gt=0.0)
    d_crit: float = Field(default=20.0, gt=0.0)
    mode: CriticalityMode = CriticalityMode.composed
    distance_reference: DistanceReference = DistanceReference.footprint

    @model_validator(mode="after")
    def _ordered_thresholds(self):
        if self.d_crit > self.d_max:
            raise ValueError(f"d_crit ({self.d_crit}) must be <= d_max ({self.d_max})")
        if self.ttc_crit > self.ttc_max:
            raise ValueError(f"ttc_crit ({self.ttc_crit}) must be <= ttc_max ({self.ttc_max})")
        return self


@dataclass(frozen=True)
class CriticalityRecord:
    frame_id: str
    pedestrian_id: str
    ttc: float
    distance: float
    kappa_c: float
    kappa_d: float
    kappa: float
    zone: Zone


RECORD_COLUMNS = [
    "frame_id",
    "pedestrian_id",
    "ttc",
    "distance",
    "kappa_c",
    "kappa_d",
    "kappa",
    "zone",
]


def _parabola(x: float, x_max: float) -> float:
    return min(max(1.0 - (x * x) / (x_max * x_max), 0.0), 1.0)


class Criticality:
    """
    Attributes:
        reachability_config (ReachabilityConfig)
        config (CriticalityConfig)

    Methods:
        distance_criticality: kappa_d from a distance.
        collision_criticality: kappa_c from a TTC_RSB.
        compose_kappa: kappa from kappa_c and kappa_d according to the mode.
        assign_zone: C / PC / NC from (ttc, distance).
        annotate_frame: One CriticalityRecord per pedestrian of a frame.
    """

    def __init__(self, reachability_config=None, config=None):
        self.reachability_config = reachability_config or ReachabilityConfig()
        self.config = config or CriticalityConfig()
        self.reachability = Reachability(self.reachability_config)

    def distance_criticality(self, d: float) -> float:
        """Downward parabola through (0, 1) and (d_max, 0), clamped to [0, 1]."""
        if math.isnan(d) or d < 0:
            raise DomainError(f"distance must be >= 0, got {d}")
        return _parabola(d, self.config.d_max)

    def collision_criticality(self, ttc: float) -> float:
        """The same parabola over time with ttc_max; +inf maps to 0."""
        if math.isnan(ttc) or ttc < 0:
            raise DomainError(f"ttc must be >= 0, got {ttc}")
        if math.isinf(ttc):
            return 0.0
        return _parabola(ttc, self.config.ttc_max)

    def compose_kappa(self, kappa_c: float, kappa_d: float, mode=None) -> float:
        """Collision criticality weighted twice: (2 * kappa_c + kappa_d) / 3."""
        for name, value in (("kappa_c", kappa_c), ("kappa_d", kappa_d)):
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")

        mode = CriticalityMode(mode or self.config.mode)
        if mode is CriticalityMode.collision_only:
            return kappa_c
        if mode is CriticalityMode.distance_only:
            return kappa_d
        return (2.0 * kappa_c + kappa_d) / 3.0

    def assign_zone(self, ttc: float, d: float) -> Zone:
        """Boundary values fall into the more critical zone."""
        if d < 0:
            raise DomainError(f"distance must be >= 0, got {d}")
        if d > self.config.d_crit:
            return Zone.NC
        if ttc <= self.config.ttc_crit:
            return Zone.C
        return Zone.PC

    def pedestrian_distance(self, av, pedestrian) -> float:
        if self.config.distance_reference is DistanceReference.center:
            return math.dist(pedestrian.position, av.position)
        return distance_point_to_rect(pedestrian.position, av_footprint(av))

    def annotate_frame(self, frame) -> list:
        """
        Returns:
            list[CriticalityRecord]: ordered by pedestrian id.
        """
        ttc_by_id = {r.pedestrian_id: r.ttc for r in self.reachability.annotate_frame_ttc(frame)}
        records = []
        for pedestrian in sorted(frame.pedestrians, key=lambda p: p.id):
            ttc = ttc_by_id[pedestrian.id]
            distance = self.pedestrian_distance(frame.av, pedestrian)
            kappa_c = self.collision_criticality(ttc)
            kappa_d = self.distance_criticality(distance)
            records.append(
                CriticalityRecord(
                    frame_id=frame.frame_id,
                    pedestrian_id=pedestrian.id,
                    ttc=ttc,
                    distance=distance,
                    kappa_c=kappa_c,
                    kappa_d=kappa_d,
                    kappa=self.compose_kappa(kappa_c, kappa_d),
                    zone=self.assign_zone(ttc, distance),
                )
            )
        return records


def records_frame(records) -> pd.DataFrame:
    """Tabulate records in the canonical column order."""
    rows = [{**asdict(r), "zone": r.zone.value} for r in records]
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


def zone_summary(records) -> pd.DataFrame:
    """Pedestrian count and share per zone."""
    frame = records_frame(records)
    counts = frame["zone"].value_counts().reindex([z.value for z in ZONES], fill_value=0)
    total = int(counts.sum())
    summary = pd.DataFrame({"zone": counts.index, "count": counts.values})
    summary["share"] = summary["count"] / total if total else 0.0
    return summary


def _encode_ttc(ttc: float):
    return None if math.isinf(ttc) else ttc


def dump_records(records, path, config: dict, stamp: str = None) -> None:
    """
    Write an annotation file: the resolved config followed by the records in
    canonical (frame_id, pedestrian_id) order. ``ttc`` is ``null`` for +inf.
    """
    ordered = sorted(records, key=lambda r: (r.frame_id, r.pedestrian_id))
    payload = {"config": config}
    if stamp:
        payload["generated_at"] = stamp
    payload["records"] = [
        {**asdict(r), "ttc": _encode_ttc(r.ttc), "zone": r.zone.value} for r in ordered
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_records(path) -> list:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        rows = data["records"]
    except FileNotFoundError as exc:
        raise SceneFormatError(path, "file does not exist") from exc
    except UnicodeDecodeError as exc:
        raise SceneFormatError(path, f"not valid UTF-8 at byte {exc.start}") from exc
    except json.JSONDecodeError as exc:
        raise SceneFormatError(path, exc.msg, line=exc.lineno, column=exc.colno) from exc
    except (KeyError, TypeError) as exc:
        raise SceneFormatError(path, "expected an object with a 'records' array") from exc

    records = []
    for row in rows:
        try:
            records.append(
                CriticalityRecord(
                    frame_id=row["frame_id"],
                    pedestrian_id=row["pedestrian_id"],
                    ttc=math.inf if row["ttc"] is None else float(row["ttc"]),
                    distance=float(row["distance"]),
                    kappa_c=float(row["kappa_c"]),
                    kappa_d=float(row["kappa_d"]),
                    kappa=float(row["kappa"]),
                    zone=Zone(row["zone"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError(path, f"malformed record {row!r}: {exc}") from exc
    return records
