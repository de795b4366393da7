"""Pseudo-noise transmit pulses.

Each phone emits a waveform built from a seeded +/-1 chip sequence,
upsampled by linear interpolation and modulated onto a near-ultrasonic
cosine carrier so it sits in the 15-20 kHz band where playback hardware
still responds but ambient noise is low.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CARRIER_BAND_HZ = (15_000.0, 20_000.0)
DEFAULT_CARRIER_HZ = 17_500.0
DEFAULT_SAMPLE_RATE_HZ = 48_000.0
DEFAULT_SEQUENCE_LENGTH = 1000
DEFAULT_UPSAMPLE = 4


@dataclass(frozen=True)
class BinarySequence:
    """Chip sequence of +/-1 integers, reproducible from its seed."""

    values: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.int64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("binary sequence must be a nonempty 1-D array")
        if not np.all(np.abs(v) == 1):
            raise ValueError("binary sequence values must be +1 or -1")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class PnPulse:
    """Shaped transmit waveform together with the chips it encodes.

    ``samples`` is the interpolated, carrier-modulated waveform at
    ``sample_rate_hz``, peak-normalized so no amplitude exceeds 1.
    """

    base: BinarySequence
    upsample_factor: int
    carrier_hz: float
    sample_rate_hz: float
    samples: np.ndarray
    phone_id: int = 0

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float64)
        if s.size != len(self.base) * self.upsample_factor:
            raise ValueError("pulse must hold sequence length times upsample factor samples")
        if np.max(np.abs(s)) > 1.0 + 1e-12:
            raise ValueError("pulse samples must stay within unit amplitude")
        lo, hi = CARRIER_BAND_HZ
        if not lo <= self.carrier_hz <= hi:
            raise ValueError(f"carrier must lie in the {lo:g}-{hi:g} Hz band")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_ms(self) -> float:
        return 1000.0 * self.samples.size / self.sample_rate_hz


def gen_pn_sequence(length: int, seed: int) -> BinarySequence:
    """Draw ``length`` i.i.d. chips with P(+1) = P(-1) = 1/2.

    The same seed always produces the same sequence, which is what lets
    every phone reconstruct every other phone's template offline.
    """
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    rng = np.random.default_rng(seed)
    values = 2 * rng.integers(0, 2, size=length, dtype=np.int64) - 1
    return BinarySequence(values=values, seed=seed)


def shape_pulse(
    base: BinarySequence,
    upsample_factor: int = DEFAULT_UPSAMPLE,
    carrier_hz: float = DEFAULT_CARRIER_HZ,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    phone_id: int = 0,
) -> PnPulse:
    """Expand chips to audio rate and mix onto the carrier.

    Upsampling inserts ``upsample_factor - 1`` linearly interpolated samples
    between consecutive chips (the last chip is held), then the sequence is
    multiplied by cos(2 pi f_c n / f_s) and rescaled to unit peak.
    """
    if upsample_factor < 1:
        raise ValueError("upsample factor must be >= 1")
    if not 0.0 < carrier_hz < sample_rate_hz / 2.0:
        raise ValueError("carrier must be positive and below the Nyquist rate")
    n_chips = len(base)
    n_out = n_chips * upsample_factor
    positions = np.arange(n_out) / upsample_factor
    envelope = np.interp(positions, np.arange(n_chips), base.values.astype(np.float64))
    carrier = np.cos(2.0 * np.pi * carrier_hz * np.arange(n_out) / sample_rate_hz)
    samples = envelope * carrier
    samples = samples / np.max(np.abs(samples))
    return PnPulse(
        base=base,
        upsample_factor=upsample_factor,
        carrier_hz=carrier_hz,
        sample_rate_hz=sample_rate_hz,
        samples=samples,
        phone_id=phone_id,
    )


def session_pulses(
    n_phones: int,
    length: int = DEFAULT_SEQUENCE_LENGTH,
    upsample_factor: int = DEFAULT_UPSAMPLE,
    carrier_hz: float = DEFAULT_CARRIER_HZ,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    master_seed: int = 0,
) -> list[PnPulse]:
    """One pulse per phone, seeded as master_seed XOR phone id."""
    if n_phones < 1:
        raise ValueError("need at least one phone")
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    return [
        shape_pulse(
            gen_pn_sequence(length, master_seed ^ pid),
            upsample_factor=upsample_factor,
            carrier_hz=carrier_hz,
            sample_rate_hz=sample_rate_hz,
            phone_id=pid,
        )
        for pid in range(n_phones)
    ]
