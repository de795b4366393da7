"""Emission schedules for measurement sessions.

All phones start recording on the same broadcast command, emit one after
another with spacing D0, and stop together at t2. Times are milliseconds
relative to command reception.
"""
from __future__ import annotations

from dataclasses import dataclass

DEFAULT_D_DELAY_MS = 100.0
# Minimum spacing between emissions. The default covers one full pulse
# (1000 chips x 4 at 48 kHz = 83.3 ms) with a little slack.
DEFAULT_DELTA_MS = 85.0


@dataclass(frozen=True)
class ScheduleConstraints:
    """Operating-system delay bound and minimum emission spacing (ms)."""

    delay_os_ms: float
    delta_ms: float = DEFAULT_DELTA_MS

    def __post_init__(self) -> None:
        if self.delay_os_ms < 0 or self.delta_ms < 0:
            raise ValueError("schedule constraints must be non-negative")


@dataclass(frozen=True)
class Schedule:
    """Per-phone emission times t1 (ms), common stop time t2 (ms)."""

    t1_ms: tuple[float, ...]
    t2_ms: float
    d_delay_ms: float
    d0_ms: float

    @property
    def n_phones(self) -> int:
        return len(self.t1_ms)


def make_schedule(n_phones: int, d_delay_ms: float = DEFAULT_D_DELAY_MS, total_t2_ms: float = 400.0) -> Schedule:
    """Evenly spread N emissions over (d_delay, t2 - d_delay).

    D0 = (t2 - 2 D_delay) / N and phone i emits at D_delay + (i + 1) D0,
    so the first emission sits D_delay + D0 after the start command and the
    last one D_delay before the stop time.
    """
    if n_phones < 2:
        raise ValueError("a ranging session needs at least two phones")
    if d_delay_ms < 0:
        raise ValueError("guard delay must be non-negative")
    if total_t2_ms <= 2 * d_delay_ms:
        raise ValueError("t2 must exceed twice the guard delay")
    d0 = (total_t2_ms - 2.0 * d_delay_ms) / n_phones
    t1 = tuple(d_delay_ms + (i + 1) * d0 for i in range(n_phones))
    return Schedule(t1_ms=t1, t2_ms=total_t2_ms, d_delay_ms=d_delay_ms, d0_ms=d0)


def validate_schedule(schedule: Schedule, constraints: ScheduleConstraints) -> list[str]:
    """Check the three feasibility conditions; empty list means valid.

    1. every emission happens after recording has surely started,
    2. every emission happens before recording may stop,
    3. emissions are spaced strictly more than delta apart (a gap equal to
       delta is a violation).
    """
    violations: list[str] = []
    for i, t1 in enumerate(schedule.t1_ms):
        if not t1 > constraints.delay_os_ms:
            violations.append(
                f"condition 1: t1[{i}]={t1:g} ms does not exceed delay_os={constraints.delay_os_ms:g} ms"
            )
    for i, t1 in enumerate(schedule.t1_ms):
        if not schedule.t2_ms - t1 > constraints.delay_os_ms:
            violations.append(
                f"condition 2: t2 - t1[{i}]={schedule.t2_ms - t1:g} ms does not exceed delay_os={constraints.delay_os_ms:g} ms"
            )
    n = schedule.n_phones
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(schedule.t1_ms[i] - schedule.t1_ms[j])
            if not gap > constraints.delta_ms:
                violations.append(
                    f"condition 3: |t1[{i}] - t1[{j}]|={gap:g} ms does not exceed delta={constraints.delta_ms:g} ms"
                )
    return violations
