"""
Module: Reachability Analysis

Time-discretized reachable sets for pedestrians and the AV, and the
reachable-set-based time-to-collision (TTC_RSB) as the first grid time at
which the two sets intersect.

- Pedestrians follow a constant-acceleration differential inclusion
  |a| <= a_max with fixed initial velocity; the position-reachable set at
  tau is exactly a disc centred on the drift point with radius
  body_radius + a_max * tau**2 / 2.
- The AV follows a lane-bound constant-velocity model along the
  concatenated centerlines.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from analysis.geometry import (
    Disc,
    FootprintSweep,
    OrientedRect,
    concat_centerlines,
    disc_shape_intersects,
    point_at_arclength,
)
from errors import GridMismatchError, OutOfPathError

logger = logging.getLogger(__name__)

_GRID_TOLERANCE = 1e-9


class ReachabilityConfig(BaseModel):
    """
    Attributes:
        dt (float): grid step in seconds.
        horizon (float): last grid time in seconds.
        a_max (float): pedestrian acceleration bound in m/s^2.
        av_swept (bool): let the AV shape at tau cover the arc interval
            travelled since the previous grid time.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(default=0.1, gt=0.0)
    horizon: float = Field(default=6.0, gt=0.0)
    a_max: float = Field(default=2.0, ge=0.0)
    av_swept: bool = False

    @model_validator(mode="after")
    def _horizon_covers_one_step(self):
        if self.horizon < self.dt:
            raise ValueError(f"horizon ({self.horizon}) must be >= dt ({self.dt})")
        return self

    def taus(self) -> np.ndarray:
        """Grid times dt, 2*dt, ..., up to the horizon."""
        steps = int(math.floor(self.horizon / self.dt + _GRID_TOLERANCE))
        return np.arange(1, steps + 1) * self.dt


@dataclass(frozen=True)
class ReachableSet:
    agent_id: str
    samples: Tuple[tuple, ...]
    clamped: bool = False

    @property
    def taus(self) -> np.ndarray:
        return np.array([tau for tau, _ in self.samples])


@dataclass(frozen=True)
class TtcResult:
    pedestrian_id: str
    ttc: float
    first_hit_tau: Optional[float]
    av_clamped: bool = False

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.ttc)


def av_footprint(av) -> OrientedRect:
    """The AV footprint at its current pose."""
    return OrientedRect(
        center=tuple(av.position),
        half_length=av.footprint_length / 2.0,
        half_width=av.footprint_width / 2.0,
        heading=av.heading,
    )


def frame_path(frame):
    return concat_centerlines(frame.current_centerline, frame.successor_centerlines)


class Reachability:
    """
    Attributes:
        config (ReachabilityConfig): grid and inclusion bound.

    Methods:
        pedestrian_reachable_set: Disc occupancy per grid time for one pedestrian.
        av_reachable_set: Footprint occupancy per grid time along the path.
        compute_ttc_rsb: Earliest grid time at which two sets intersect.
        annotate_frame_ttc: TTC_RSB for every pedestrian of a frame.
    """

    def __init__(self, config: ReachabilityConfig = None):
        self.config = config or ReachabilityConfig()

    def pedestrian_reachable_set(self, pedestrian) -> ReachableSet:
        px, py = pedestrian.position
        vx, vy = pedestrian.velocity
        samples = tuple(
            (
                float(tau),
                Disc(
                    center=(px + vx * tau, py + vy * tau),
                    radius=pedestrian.body_radius + 0.5 * self.config.a_max * tau * tau,
                ),
            )
            for tau in self.config.taus()
        )
        return ReachableSet(agent_id=pedestrian.id, samples=samples)

    def _footprint_at(self, av, path, s) -> OrientedRect:
        center, heading = point_at_arclength(path, s)
        return OrientedRect(
            center=center,
            half_length=av.footprint_length / 2.0,
            half_width=av.footprint_width / 2.0,
            heading=heading,
        )

    def _sweep(self, av, path, s_start, s_end) -> FootprintSweep:
        spacing = av.footprint_length / 2.0
        count = max(int(math.ceil((s_end - s_start) / spacing)), 1)
        arcs = np.linspace(s_start, s_end, count + 1)
        return FootprintSweep(tuple(self._footprint_at(av, path, float(s)) for s in arcs))

    def av_reachable_set(self, av, path) -> ReachableSet:
        """
        Place the footprint at the constant-velocity arc length for each grid time.

        Past the end of the path the footprint is held at the last point and the
        returned set is flagged as clamped.

        Raises:
            OutOfPathError: if ``av.arc_offset`` is not on the path.
        """
        if av.arc_offset > path.length + _GRID_TOLERANCE:
            raise OutOfPathError(
                f"AV arc_offset {av.arc_offset:.3f} m beyond path length {path.length:.3f} m"
            )

        clamped = False
        samples = []
        previous_s = av.arc_offset
        for tau in self.config.taus():
            s = av.arc_offset + av.speed * tau
            if s > path.length:
                s = path.length
                clamped = True
            if self.config.av_swept:
                shape = self._sweep(av, path, previous_s, s)
            else:
                shape = self._footprint_at(av, path, s)
            samples.append((float(tau), shape))
            previous_s = s

        if clamped:
            logger.warning(
                "AV clamped at map end",
                extra={"path_length": path.length, "arc_offset": av.arc_offset},
            )
        return ReachableSet(agent_id="av", samples=tuple(samples), clamped=clamped)

    @staticmethod
    def compute_ttc_rsb(av_set: ReachableSet, ped_set: ReachableSet) -> TtcResult:
        """
        Raises:
            GridMismatchError: if the two sets are not sampled on the same grid.
        """
        av_taus, ped_taus = av_set.taus, ped_set.taus
        if av_taus.shape != ped_taus.shape or not np.allclose(
            av_taus, ped_taus, rtol=0.0, atol=_GRID_TOLERANCE
        ):
            raise GridMismatchError(
                f"grid mismatch between {av_set.agent_id!r} ({len(av_taus)} samples) "
                f"and {ped_set.agent_id!r} ({len(ped_taus)} samples)"
            )

        for (tau, av_shape), (_, disc) in zip(av_set.samples, ped_set.samples):
            if disc_shape_intersects(disc, av_shape):
                return TtcResult(ped_set.agent_id, tau, tau, av_set.clamped)
        return TtcResult(ped_set.agent_id, math.inf, None, av_set.clamped)

    def annotate_frame_ttc(self, frame) -> list:
        """
        Returns:
            list[TtcResult]: one result per pedestrian, ordered by pedestrian id.
        """
        pedestrians = sorted(frame.pedestrians, key=lambda p: p.id)
        if not pedestrians:
            return []
        av_set = self.av_reachable_set(frame.av, frame_path(frame))
        return [
            self.compute_ttc_rsb(av_set, self.pedestrian_reachable_set(p))
            for p in pedestrians
        ]
