"""Outage probability and coverage versus distance for hybrid path loss models."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .los_probability import radius_grid
from .pathloss import HybridModel, mean_pl_hybrid, shadow_sigma_hybrid


@dataclass(frozen=True)
class OutageSpec:
    """Link budget: the maximum tolerable path loss in dB.

    May be +inf, meaning the link never drops.
    """

    max_path_loss_db: float

    def __post_init__(self):
        if math.isnan(self.max_path_loss_db):
            raise ValueError("max_path_loss_db must not be NaN")


def outage_probability(model: HybridModel, d_m: float, spec: OutageSpec) -> float:
    """Probability that shadowed path loss exceeds the budget at distance d.

    Path loss in dB is normal with the hybrid mean and spread, so this is the
    Gaussian upper tail.  A zero spread degenerates to a deterministic
    comparison of the mean against the budget.
    """
    mean = mean_pl_hybrid(model, d_m)
    sigma = shadow_sigma_hybrid(model, d_m)
    threshold = spec.max_path_loss_db
    if sigma == 0.0:
        return 1.0 if mean > threshold else 0.0
    if math.isinf(threshold):
        return 0.0 if threshold > 0 else 1.0
    z = (threshold - mean) / sigma
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def coverage_curve(
    model: HybridModel,
    spec: OutageSpec,
    r_min: float = 10.0,
    r_max: float = 200.0,
    step: float = 1.0,
) -> "list[tuple[float, float]]":
    """Coverage probability (1 - outage) over a distance grid.

    Returns (distance, coverage) pairs in grid order.  A single-point grid is
    allowed.
    """
    return [
        (float(d), 1.0 - outage_probability(model, float(d), spec))
        for d in radius_grid(r_min, r_max, step)
    ]
