"""Time-of-arrival recovery from recorded audio.

The receive chain is deliberately cheap: clamp every sample to +/-1 with a
sign filter, correlate against the +/-1 version of each phone's pulse, and
pick correlation peaks. Because only signs survive the filter, the chain is
exactly invariant to positive amplitude scaling, which stands in for the
unknown gain of phone microphones. Pulses are extracted iteratively,
strongest first, zeroing each matched window before rescanning so weaker
arrivals are not shadowed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .pulse import PnPulse

DEFAULT_MIN_SCORE_RATIO = 0.35


@dataclass(frozen=True)
class Recording:
    """One phone's microphone capture for a session.

    ``start_offset_samples`` locates the capture on the simulator's global
    timeline. Detection never reads it; it exists so test oracles can map
    local arrival indices back to ground truth.
    """

    phone_id: int
    samples: np.ndarray
    sample_rate_hz: float
    start_offset_samples: int = 0

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("recording must be a nonempty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        if self.phone_id < 0:
            raise ValueError("phone id must be non-negative")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass
class ToaMatrix:
    """Arrival sample T[i][j] of phone j's pulse within recording i.

    Indices are local to each recording, so rows live on unrelated clocks.
    Absent entries hold -1 with ``present`` False.
    """

    sample: np.ndarray
    present: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.sample, dtype=np.int64)
        p = np.asarray(self.present, dtype=bool)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape != p.shape:
            raise ValueError("TOA matrix must be square with a matching presence mask")
        self.sample = s
        self.present = p

    @classmethod
    def empty(cls, n_phones: int) -> "ToaMatrix":
        return cls(
            sample=np.full((n_phones, n_phones), -1, dtype=np.int64),
            present=np.zeros((n_phones, n_phones), dtype=bool),
        )

    @property
    def n_phones(self) -> int:
        return int(self.sample.shape[0])

    def get(self, i: int, j: int) -> int | None:
        return int(self.sample[i, j]) if self.present[i, j] else None


@dataclass
class DetectionReport:
    """TOAs plus raw peak scores; ``missed`` lists (recording, pulse) pairs
    that never produced a peak above the acceptance threshold.

    ``accepted`` logs (recording, pulse, lag, normalized score) in the order
    peaks were extracted. Within one recording the scores come out
    non-increasing whenever pulses do not overlap: cancelling one pulse
    cannot raise another's peak.
    """

    toa: ToaMatrix
    peak_scores: np.ndarray
    missed: list[tuple[int, int]] = field(default_factory=list)
    accepted: list[tuple[int, int, int, float]] = field(default_factory=list)


def sign_filter(samples: np.ndarray) -> np.ndarray:
    """Map each sample to +1 (if >= 0) or -1. Zeros count as positive."""
    x = np.asarray(samples)
    if x.size == 0:
        raise ValueError("cannot sign-filter an empty signal")
    return np.where(x >= 0, 1, -1).astype(np.int8)


def binary_matched_filter(signed: np.ndarray, template: np.ndarray) -> np.ndarray:
    """Correlation scores of a +/-1 signal against a +/-1 template.

    Entry n is sum_k signed[n + k] * template[k], one value per lag with
    full template overlap. Scores are exact integers in [-M, M] for a
    template of length M; the FFT product is rounded back to int, which
    recovers the direct sum bit for bit.
    """
    s = np.asarray(signed, dtype=np.float64)
    t = np.asarray(template, dtype=np.float64)
    if s.ndim != 1 or t.ndim != 1:
        raise ValueError("matched filter operates on 1-D signals")
    if t.size == 0 or s.size == 0:
        raise ValueError("matched filter needs nonempty inputs")
    if t.size > s.size:
        raise ValueError("template is longer than the signal")
    scores = fftconvolve(s, t[::-1], mode="valid")
    return np.rint(scores).astype(np.int64)


def _sign_template(pulse: PnPulse) -> np.ndarray:
    return sign_filter(pulse.samples)


def detect_peaks_iterative(
    recording: Recording,
    pulses: list[PnPulse],
    min_score_ratio: float = DEFAULT_MIN_SCORE_RATIO,
) -> DetectionReport:
    """Extract every phone's TOA from one recording.

    Repeats: sign-filter the working signal, correlate against all remaining
    templates, accept the globally best normalized peak, then zero the
    matched window and rescan. Ties go to the earliest lag, then the lowest
    phone id. Extraction stops when the best remaining peak falls below
    ``min_score_ratio`` times the template length; those pulses are missed.
    """
    if not pulses:
        raise ValueError("need at least one pulse template")
    if not 0.0 < min_score_ratio < 1.0:
        raise ValueError("min_score_ratio must lie strictly between 0 and 1")
    n = len(pulses)
    ids = sorted(p.phone_id for p in pulses)
    if ids != list(range(n)):
        raise ValueError("pulse phone ids must cover 0..N-1 exactly once")
    row = recording.phone_id
    if row >= n:
        raise ValueError("recording phone id has no matching pulse")

    templates = {p.phone_id: _sign_template(p) for p in pulses}
    working = np.array(recording.samples, dtype=np.float64, copy=True)
    toa = ToaMatrix.empty(n)
    scores = np.full((n, n), np.nan)
    accepted: list[tuple[int, int, int, float]] = []
    remaining = set(range(n))

    while remaining:
        signed = sign_filter(working)
        best = None  # (norm_score, -lag, -pulse_id, raw_score)
        for j in sorted(remaining):
            t = templates[j]
            if t.size > signed.size:
                continue
            corr = binary_matched_filter(signed, t)
            lag = int(np.argmax(corr))  # argmax takes the earliest max
            raw = int(corr[lag])
            cand = (raw / t.size, -lag, -j, raw)
            if best is None or cand > best:
                best = cand
        if best is None or best[0] < min_score_ratio:
            break
        norm, neg_lag, neg_j, raw = best
        lag, j = -neg_lag, -neg_j
        toa.sample[row, j] = lag
        toa.present[row, j] = True
        scores[row, j] = raw
        accepted.append((row, j, lag, norm))
        working[lag : lag + templates[j].size] = 0.0
        remaining.remove(j)

    missed = [(row, j) for j in range(n) if not toa.present[row, j]]
    return DetectionReport(toa=toa, peak_scores=scores, missed=missed, accepted=accepted)


def detect_session(
    recordings: list[Recording],
    pulses: list[PnPulse],
    min_score_ratio: float = DEFAULT_MIN_SCORE_RATIO,
) -> DetectionReport:
    """Run iterative detection on every recording and merge rows."""
    n = len(pulses)
    toa = ToaMatrix.empty(n)
    scores = np.full((n, n), np.nan)
    missed: list[tuple[int, int]] = []
    accepted: list[tuple[int, int, int, float]] = []
    for rec in recordings:
        part = detect_peaks_iterative(rec, pulses, min_score_ratio)
        i = rec.phone_id
        toa.sample[i] = part.toa.sample[i]
        toa.present[i] = part.toa.present[i]
        scores[i] = part.peak_scores[i]
        missed.extend(part.missed)
        accepted.extend(part.accepted)
    return DetectionReport(toa=toa, peak_scores=scores, missed=missed, accepted=accepted)
