"""Distances from counted arrival samples.

Between two phones the elapsed time between their two pulse arrivals,
measured once on each phone, contains the propagation delay twice with
opposite sign. Differencing the two elapsed times therefore cancels both
clock offsets: no synchronization is required, only stable sample counting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detect import ToaMatrix

SPEED_OF_SOUND_MPS = 340.0  # fixed room-temperature default (about 25 C)
MAX_RANGE_M = 8.0  # distances above this are treated as outliers


@dataclass(frozen=True)
class SoundSpeedModel:
    """Speed of sound at a given air temperature."""

    temperature_c: float
    speed_mps: float

    def __post_init__(self) -> None:
        if self.speed_mps <= 0:
            raise ValueError("speed of sound must be positive")

    @classmethod
    def from_temperature(cls, temperature_c: float) -> "SoundSpeedModel":
        return cls(temperature_c=temperature_c, speed_mps=speed_of_sound(temperature_c))


def speed_of_sound(temperature_c: float) -> float:
    """Linear dry-air model 331.3 + 0.606 theta (m/s), theta in Celsius."""
    if not -40.0 <= temperature_c <= 60.0:
        raise ValueError("temperature outside the -40..60 C validity range")
    return 331.3 + 0.606 * temperature_c


def etoa_distance(
    delta1_samples: int,
    delta2_samples: int,
    sample_rate_hz: float,
    speed_mps: float = SPEED_OF_SOUND_MPS,
) -> float:
    """Distance from the two elapsed sample counts of a pulse exchange.

    d = speed * |delta1 - delta2| / (2 fs). delta1 and delta2 are the
    between-arrival sample counts observed by the two phones; each one is a
    difference of two local indices, so any constant per-phone clock offset
    drops out before this function is reached.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample rate must be positive")
    if speed_mps <= 0:
        raise ValueError("speed of sound must be positive")
    return speed_mps * abs(int(delta1_samples) - int(delta2_samples)) / (2.0 * sample_rate_hz)


@dataclass
class DistanceMeasurement:
    """Pairwise distances (m) with a validity mask.

    mask[i][j] is True where a distance was actually measured. The diagonal
    is zero and always valid.
    """

    d: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=np.float64)
        m = np.asarray(self.mask, dtype=bool)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape != m.shape:
            raise ValueError("distance matrix must be square with a matching mask")
        self.d = d
        self.mask = m

    @property
    def n_phones(self) -> int:
        return int(self.d.shape[0])

    def to_dict(self) -> dict:
        return {"d": self.d.tolist(), "mask": self.mask.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "DistanceMeasurement":
        return cls(d=np.asarray(data["d"]), mask=np.asarray(data["mask"]))


def toa_to_distances(
    toa: ToaMatrix,
    sample_rate_hz: float,
    speed_mps: float = SPEED_OF_SOUND_MPS,
    max_range_m: float = MAX_RANGE_M,
) -> DistanceMeasurement:
    """All pairwise distances recoverable from a session's TOA matrix.

    d_ij = speed * |(T[i][j] - T[i][i]) - (T[j][j] - T[j][i])| / (2 fs).
    A pair needs all four entries present; anything else, or a distance
    beyond ``max_range_m``, leaves the pair unmasked. Row-local indexing
    makes the result invariant to any constant shift of a recording clock.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample rate must be positive")
    if speed_mps <= 0:
        raise ValueError("speed of sound must be positive")
    n = toa.n_phones
    d = np.zeros((n, n))
    mask = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if not (
                toa.present[i, j]
                and toa.present[i, i]
                and toa.present[j, j]
                and toa.present[j, i]
            ):
                continue
            num = (toa.sample[i, j] - toa.sample[i, i]) - (toa.sample[j, j] - toa.sample[j, i])
            dist = speed_mps * abs(int(num)) / (2.0 * sample_rate_hz)
            d[i, j] = d[j, i] = dist
            ok = dist <= max_range_m
            mask[i, j] = mask[j, i] = ok
    return DistanceMeasurement(d=d, mask=mask)
