import numpy as np
import pytest

from acoustloc.schedule import Schedule, ScheduleConstraints, make_schedule, validate_schedule


def test_make_schedule_four_phones():
    s = make_schedule(4, 100.0, 400.0)
    assert s.d0_ms == pytest.approx(50.0)
    assert s.t1_ms == pytest.approx((150.0, 200.0, 250.0, 300.0))
    assert s.t2_ms == 400.0
    assert s.n_phones == 4


def test_make_schedule_degenerate_guard():
    s = make_schedule(2, 0.0, 2.0)
    assert s.d0_ms == pytest.approx(1.0)
    assert s.t1_ms == pytest.approx((1.0, 2.0))


def test_make_schedule_last_phone_keeps_guard_margin():
    s = make_schedule(5, 100.0, 600.0)
    assert s.d0_ms == pytest.approx(80.0)
    assert s.t1_ms == pytest.approx((180.0, 260.0, 340.0, 420.0, 500.0))
    assert s.t2_ms - s.t1_ms[-1] == pytest.approx(100.0)


def test_make_schedule_rejections():
    with pytest.raises(ValueError):
        make_schedule(1, 100.0, 400.0)
    with pytest.raises(ValueError):
        make_schedule(4, -1.0, 400.0)
    with pytest.raises(ValueError):
        make_schedule(4, 100.0, 200.0)  # t2 == 2 d_delay


def test_validate_passes_with_margin():
    s = make_schedule(4, 100.0, 400.0)
    assert validate_schedule(s, ScheduleConstraints(delay_os_ms=90.0, delta_ms=40.0)) == []


def test_validate_boundary_gap_is_violation():
    s = make_schedule(4, 100.0, 400.0)
    violations = validate_schedule(s, ScheduleConstraints(delay_os_ms=90.0, delta_ms=50.0))
    assert violations
    assert all(v.startswith("condition 3") for v in violations)


def test_validate_guard_below_os_bound():
    # first emission at 80 ms and last margin 10 ms, both under the 90 ms bound
    s = make_schedule(4, 10.0, 300.0)
    violations = validate_schedule(s, ScheduleConstraints(delay_os_ms=90.0, delta_ms=10.0))
    conditions = {v.split(":")[0] for v in violations}
    assert "condition 1" in conditions
    assert "condition 2" in conditions


def test_uniform_spacing_and_closed_form_validity():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        d_delay = float(rng.uniform(0.0, 200.0))
        t2 = float(2 * d_delay + rng.uniform(1.0, 1000.0))
        s = make_schedule(n, d_delay, t2)
        gaps = np.diff(s.t1_ms)
        assert np.allclose(gaps, s.d0_ms, rtol=1e-12, atol=1e-9)
        # whenever d_delay > delay_os and d0 > delta the schedule validates
        delay_os = float(rng.uniform(0.0, d_delay)) if d_delay > 0 else 0.0
        delta = float(rng.uniform(0.0, s.d0_ms))
        if d_delay > delay_os and s.d0_ms > delta:
            assert validate_schedule(s, ScheduleConstraints(delay_os, delta)) == []


def test_constraints_reject_negative():
    with pytest.raises(ValueError):
        ScheduleConstraints(delay_os_ms=-1.0)
    with pytest.raises(ValueError):
        ScheduleConstraints(delay_os_ms=0.0, delta_ms=-5.0)


def test_schedule_fields_consistent():
    s = Schedule(t1_ms=(150.0, 200.0), t2_ms=300.0, d_delay_ms=50.0, d0_ms=50.0)
    assert s.n_phones == 2
