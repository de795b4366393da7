import numpy as np
import pytest

from acoustloc.detect import ToaMatrix, detect_session
from acoustloc.pulse import session_pulses
from acoustloc.ranging import (
    SoundSpeedModel,
    etoa_distance,
    speed_of_sound,
    toa_to_distances,
)
from acoustloc.schedule import make_schedule
from acoustloc.sim import ChannelModel, simulate_session
from acoustloc.edm import PointConfig


def test_speed_of_sound_reference_points():
    assert speed_of_sound(0.0) == pytest.approx(331.3)
    assert speed_of_sound(25.0) == pytest.approx(346.45)
    assert speed_of_sound(-40.0) == pytest.approx(307.06)


def test_speed_of_sound_range_checked():
    with pytest.raises(ValueError):
        speed_of_sound(-41.0)
    with pytest.raises(ValueError):
        speed_of_sound(60.5)


def test_sound_speed_model_from_temperature():
    m = SoundSpeedModel.from_temperature(25.0)
    assert m.temperature_c == 25.0
    assert m.speed_mps == pytest.approx(346.45)


def test_etoa_distance_examples():
    assert etoa_distance(1000, 800, 48_000.0, 340.0) == pytest.approx(340.0 * 200 / 96_000.0)
    assert etoa_distance(512, 512, 48_000.0, 340.0) == 0.0
    assert etoa_distance(480, 0, 48_000.0, 340.0) == pytest.approx(1.7)


def test_toa_to_distances_two_phone_example():
    # phones 1.7 m apart, phone 0 emits at global sample 0, phone 1 at 1000
    toa = ToaMatrix(
        sample=np.array([[0, 1240], [240, 1000]], dtype=np.int64),
        present=np.ones((2, 2), dtype=bool),
    )
    dm = toa_to_distances(toa, 48_000.0, speed_mps=340.0)
    assert dm.d[0, 1] == pytest.approx(1.7)
    assert dm.d[1, 0] == pytest.approx(1.7)
    assert dm.mask[0, 1]


def test_missing_toa_unmasks_pair():
    rng = np.random.default_rng(0)
    n = 5
    sample = rng.integers(0, 5000, size=(n, n)).astype(np.int64)
    present = np.ones((n, n), dtype=bool)
    present[2, 4] = False  # one missing cross entry
    dm = toa_to_distances(ToaMatrix(sample=sample, present=present), 48_000.0, max_range_m=1e9)
    assert not dm.mask[2, 4] and not dm.mask[4, 2]
    others = ~np.eye(n, dtype=bool)
    others[2, 4] = others[4, 2] = False
    assert dm.mask[others].all()


def test_outlier_beyond_max_range_unmasked():
    # 9.2 m: |delta1 - delta2| = 2 * 9.2 * fs / v
    num = int(round(2 * 9.2 * 48_000.0 / 340.0))
    toa = ToaMatrix(
        sample=np.array([[0, num], [0, 0]], dtype=np.int64),
        present=np.ones((2, 2), dtype=bool),
    )
    dm = toa_to_distances(toa, 48_000.0, speed_mps=340.0, max_range_m=8.0)
    assert dm.d[0, 1] == pytest.approx(9.2, abs=1e-2)
    assert not dm.mask[0, 1]


def test_row_clock_shift_invariance():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        sample = rng.integers(0, 100_000, size=(n, n)).astype(np.int64)
        present = rng.random((n, n)) < 0.9
        toa = ToaMatrix(sample=sample, present=present)
        base = toa_to_distances(toa, 48_000.0)
        shifted = sample + rng.integers(-50_000, 50_000, size=(n, 1))
        moved = toa_to_distances(ToaMatrix(sample=shifted, present=present.copy()), 48_000.0)
        assert np.array_equal(base.d, moved.d)
        assert np.array_equal(base.mask, moved.mask)


def test_output_symmetric_zero_diagonal():
    rng = np.random.default_rng(4)
    sample = rng.integers(0, 50_000, size=(6, 6)).astype(np.int64)
    dm = toa_to_distances(ToaMatrix(sample=sample, present=np.ones((6, 6), bool)), 48_000.0, max_range_m=1e9)
    assert np.array_equal(dm.d, dm.d.T)
    assert np.all(np.diagonal(dm.d) == 0.0)
    assert np.all(np.diagonal(dm.mask))


def test_signal_level_round_trip_quantization():
    """Noiseless pipeline distance equals geometry within sample rounding."""
    rng = np.random.default_rng(5)
    pulses = session_pulses(2, master_seed=8)
    sched = make_schedule(2, 110.0, 450.0)
    quantum = 340.0 / (2 * 48_000.0)
    for _ in range(5):
        d_true = float(rng.uniform(0.3, 6.0))
        pts = PointConfig(x=np.array([[0.0, 0.0], [d_true, 0.0]]))
        recordings, _ = simulate_session(pts, sched, pulses, ChannelModel(seed=1))
        report = detect_session(recordings, pulses)
        dm = toa_to_distances(report.toa, 48_000.0)
        assert dm.mask[0, 1]
        assert abs(dm.d[0, 1] - d_true) <= 2 * quantum + 1e-12


def test_rejects_bad_rates():
    toa = ToaMatrix.empty(2)
    with pytest.raises(ValueError):
        toa_to_distances(toa, 0.0)
    with pytest.raises(ValueError):
        etoa_distance(1, 2, 48_000.0, speed_mps=0.0)
