"""
Module: Safety-Adapted Focal Loss

Scalar kernels for the focal loss FL(p) = -alpha (1-p)^gamma ln(p) and its
safety-adapted form FL_kappa(p) = -alpha (1-p)^(gamma-kappa) ln(p), with
analytic derivatives w.r.t. the probability p and the pre-sigmoid logit.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DomainError, MissingAnnotationError


class LossParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=0.25, gt=0.0)
    gamma: float = Field(default=2.0, ge=0.0)
    kappa: float = Field(default=0.0, ge=0.0)
    eps: float = Field(default=1e-7, gt=0.0, lt=0.5)

    @model_validator(mode="after")
    def _kappa_below_gamma(self):
        if self.kappa > self.gamma:
            raise ValueError(f"kappa ({self.kappa}) must be <= gamma ({self.gamma})")
        return self


@dataclass(frozen=True)
class LossEval:
    value: float
    d_dp: float
    d_dlogit: float


@dataclass(frozen=True)
class LossItem:
    """
    One classification output.

    ``target`` is 1 for an anchor assigned to an object of class ``cls`` and 0
    for a background anchor.
    """

    p: float
    cls: str = "pedestrian"
    kappa: Optional[float] = None
    target: int = 1


@dataclass(frozen=True)
class BatchLoss:
    total: float
    per_item: list = field(default_factory=list)
    num_positive: int = 0

    @property
    def normalized(self) -> float:
        """Total divided by the number of positive items (at least one)."""
        return self.total / max(self.num_positive, 1)


def _positive_term(p: float, alpha: float, exponent: float) -> LossEval:
    log_p = math.log(p)
    # (1-p)^0 is taken as 1, matching the alpha-weighted BCE limit
    modulating = 1.0 if exponent == 0 else math.exp(exponent * math.log1p(-p))
    value = -alpha * modulating * log_p
    d_dp = alpha * exponent * (modulating / (1.0 - p)) * log_p - alpha * modulating / p
    d_dlogit = alpha * modulating * (exponent * p * log_p - (1.0 - p))
    return LossEval(value=value, d_dp=d_dp, d_dlogit=d_dlogit)


def _clamp(p: float, eps: float) -> float:
    if p is None or math.isnan(p):
        raise DomainError(f"probability must be a number, got {p}")
    return min(max(p, eps), 1.0 - eps)


def safety_focal_loss(p: float, kappa: Optional[float] = None, params: LossParams = None) -> LossEval:
    """
    Evaluate FL_kappa at ``p``.

    ``kappa`` defaults to the configured ``params.kappa``.

    ``p`` is clamped to [eps, 1 - eps]; derivatives are reported at the
    clamped value.

    Raises:
        DomainError: for NaN ``p`` or ``kappa`` outside [0, gamma].
    """
    params = params or LossParams()
    if kappa is None:
        kappa = params.kappa
    if math.isnan(kappa) or kappa < 0 or kappa > params.gamma:
        raise DomainError(f"kappa must lie in [0, gamma={params.gamma}], got {kappa}")
    return _positive_term(_clamp(p, params.eps), params.alpha, params.gamma - kappa)


def focal_loss(p: float, params: LossParams = None) -> LossEval:
    return safety_focal_loss(p, 0.0, params)


def background_focal_loss(p: float, params: LossParams = None) -> LossEval:
    """-(1-alpha) p^gamma ln(1-p) for an anchor whose target is background."""
    params = params or LossParams()
    if params.alpha >= 1.0:
        raise DomainError(f"background term needs alpha < 1, got {params.alpha}")
    q = 1.0 - _clamp(p, params.eps)
    mirrored = _positive_term(q, 1.0 - params.alpha, params.gamma)
    return LossEval(value=mirrored.value, d_dp=-mirrored.d_dp, d_dlogit=-mirrored.d_dlogit)


def batch_loss(predictions, params: LossParams = None, pedestrian_class: str = "pedestrian"):
    """
    Sum the per-item losses of a batch.

    Items are :class:`LossItem` or ``(p, cls, kappa)`` tuples. kappa is used for
    positive items of ``pedestrian_class`` only; every other item uses 0.

    Raises:
        MissingAnnotationError: if a positive pedestrian item carries no kappa.
    """
    params = params or LossParams()
    per_item = []
    num_positive = 0
    for index, item in enumerate(predictions):
        if not isinstance(item, LossItem):
            item = LossItem(*item)
        if item.target == 0:
            per_item.append(background_focal_loss(item.p, params))
            continue

        num_positive += 1
        if item.cls == pedestrian_class:
            if item.kappa is None:
                raise MissingAnnotationError(
                    f"item {index}: pedestrian prediction without criticality kappa"
                )
            per_item.append(safety_focal_loss(item.p, item.kappa, params))
        else:
            per_item.append(focal_loss(item.p, params))

    total = float(sum(e.value for e in per_item))
    return BatchLoss(total=total, per_item=per_item, num_positive=num_positive)


def emit_loss_curves(
    params: LossParams = None,
    kappas=None,
    steps: int = 200,
    p_min: float = 0.1,
    p_max: float = 0.999,
    baseline_gammas=(),
) -> pd.DataFrame:
    """
    Tabulate FL and FL_kappa over a probability grid.

    Returns:
        pandas.DataFrame: columns ``p``, ``FL``, one ``FL_kappa=<k>`` per kappa
        (only ``params.kappa`` when ``kappas`` is None) and one ``FL_gamma=<g>``
        per baseline gamma.
    """
    params = params or LossParams()
    if kappas is None:
        kappas = (params.kappa,)
    if steps < 2:
        raise DomainError(f"the probability grid needs at least 2 points, got {steps}")
    if not 0.0 < p_min < p_max < 1.0:
        raise DomainError(f"need 0 < p_min < p_max < 1, got [{p_min}, {p_max}]")

    grid = np.linspace(p_min, p_max, steps)
    table = pd.DataFrame({"p": grid})
    table["FL"] = [focal_loss(p, params).value for p in grid]
    for kappa in kappas:
        table[f"FL_kappa={kappa:g}"] = [safety_focal_loss(p, kappa, params).value for p in grid]
    for gamma in baseline_gammas:
        baseline = params.model_copy(update={"gamma": gamma, "kappa": 0.0})
        table[f"FL_gamma={gamma:g}"] = [focal_loss(p, baseline).value for p in grid]
    return table
