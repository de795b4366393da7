"""Combining repeated distance measurements into one solver problem.

Repetitions are cheap (one schedule run each), so accuracy comes from
averaging: per-pair means give the target distances and per-pair sample
variances drive inverse-variance weights. A pair measured in only some
repetitions still contributes, using whatever subset it has.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edm import Edm
from .mds import SStressProblem
from .ranging import DistanceMeasurement

# Sample variances of a handful of repetitions can collapse to zero by luck;
# (5 mm)^2 keeps the weight of any single pair bounded.
VARIANCE_FLOOR_M2 = 0.005**2


@dataclass
class MeasurementSet:
    """Distance measurements from m repetitions of the same session."""

    measurements: list[DistanceMeasurement]

    def __post_init__(self) -> None:
        if not self.measurements:
            raise ValueError("measurement set cannot be empty")
        n = self.measurements[0].n_phones
        if any(m.n_phones != n for m in self.measurements):
            raise ValueError("all repetitions must cover the same phones")

    @property
    def m(self) -> int:
        return len(self.measurements)

    @property
    def n_phones(self) -> int:
        return self.measurements[0].n_phones


def pair_stats(ms: MeasurementSet, of: str = "distance") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair mean, sample variance and count across repetitions.

    Statistics run over the repetitions where each pair was actually
    measured. ``of`` selects whether variance is taken over distances or
    their squares. Pairs seen fewer than twice report zero variance.
    """
    if of not in ("distance", "squared"):
        raise ValueError("statistics run over 'distance' or 'squared' values")
    n = ms.n_phones
    d = np.stack([m.d for m in ms.measurements])
    valid = np.stack([m.mask for m in ms.measurements])
    vals = d if of == "distance" else d * d

    count = valid.sum(axis=0)
    safe = np.maximum(count, 1)
    mean_d = np.where(valid, d, 0.0).sum(axis=0) / safe
    mean_v = np.where(valid, vals, 0.0).sum(axis=0) / safe
    dev = np.where(valid, vals - mean_v, 0.0)
    var = np.zeros((n, n))
    two_plus = count >= 2
    var[two_plus] = (dev * dev).sum(axis=0)[two_plus] / (count[two_plus] - 1)
    return mean_d, var, count


def fuse(
    ms: MeasurementSet,
    strategy: str = "optimal",
    variance_floor: float = VARIANCE_FLOOR_M2,
    dim: int = 2,
    variance_of: str = "distance",
) -> SStressProblem:
    """Average repetitions into an s-stress problem.

    Target squared distances are the squared per-pair means. "equal" puts
    weight 1 on every measured pair. "optimal" needs m >= 2 and weights each
    pair by 1/sigma^4 of its distance samples (floored variance), normalized
    to sum to 1 across the weight matrix; pairs with wildly different noise
    then contribute according to their reliability.
    """
    if strategy not in ("equal", "optimal"):
        raise ValueError("strategy must be 'equal' or 'optimal'")
    if variance_floor <= 0:
        raise ValueError("variance floor must be positive")
    if strategy == "optimal" and ms.m < 2:
        raise ValueError("optimal weighting needs at least two repetitions")

    n = ms.n_phones
    mean_d, var, count = pair_stats(ms, of=variance_of)
    off = ~np.eye(n, dtype=bool)
    measured = (count > 0) & off

    dsq = np.where(measured, mean_d * mean_d, 0.0)
    np.fill_diagonal(dsq, 0.0)
    mask = measured | np.eye(n, dtype=bool)
    target = Edm(dsq=dsq, mask=mask)

    if strategy == "equal":
        weights = measured.astype(np.float64)
    else:
        sigma2 = np.maximum(var, variance_floor)
        weights = np.where(measured, 1.0 / (sigma2 * sigma2), 0.0)
        total = weights.sum()
        if total > 0:
            weights = weights / total
    return SStressProblem(target=target, weights=weights, dim=dim)
