"""Config-driven end-to-end scenarios.

A scenario bundles geometry, channel, schedule, pulse and solver settings
into one JSON document, runs the full pipeline (simulate, detect, range,
fuse, solve, align) and returns a serializable result. Identical config and
master seed reproduce the result byte for byte; nothing time- or
machine-dependent is written into it.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import align_and_score
from .detect import DetectionReport, detect_session
from .edm import PointConfig
from .fusion import VARIANCE_FLOOR_M2, MeasurementSet, fuse, pair_stats
from .mds import SolverSettings, UnderConstrainedError, sstress_solve
from .pulse import session_pulses
from .ranging import MAX_RANGE_M, SPEED_OF_SOUND_MPS, DistanceMeasurement, toa_to_distances
from .schedule import make_schedule
from .sim import ChannelModel, simulate_session, write_pcm

PRESETS: dict[str, list[list[float]]] = {
    # plus shape, 1 m arms
    "cross5": [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    # six phones on a 3 x 2 slice of a 3 x 3 grid, 1 m spacing
    "grid33": [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]],
}


class ConfigError(ValueError):
    """Invalid scenario config; ``problems`` lists field-path messages."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _read(data: dict, path: str, key: str, kind, default, problems: list[str]):
    value = data.get(key, default)
    if value is None:
        return None
    try:
        if kind is int and isinstance(value, bool):
            raise TypeError
        return kind(value)
    except (TypeError, ValueError):
        problems.append(f"{path}{key}: expected {kind.__name__}, got {value!r}")
        return default


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario parameters (defaults already applied)."""

    geometry: tuple[tuple[float, ...], ...]
    geometry_name: str | None
    repetitions: int
    master_seed: int
    sample_rate_hz: float
    speed_mps: float
    pulse_length: int
    pulse_upsample: int
    carrier_hz: float
    d_delay_ms: float
    t2_ms: float
    noise_std: float
    attenuation_exponent: float
    os_jitter_ms_max: float
    drop_prob: float
    echo_delay_ms: float
    echo_gain: float
    min_score_ratio: float
    max_range_m: float
    fusion_strategy: str
    variance_floor: float
    variance_of: str
    solver: SolverSettings
    solver_dim: int

    @property
    def n_phones(self) -> int:
        return len(self.geometry)

    def positions(self) -> PointConfig:
        return PointConfig(x=np.asarray(self.geometry))

    def channel(self) -> ChannelModel:
        return ChannelModel(
            speed_mps=self.speed_mps,
            noise_std=self.noise_std,
            attenuation_exponent=self.attenuation_exponent,
            os_jitter_ms_max=self.os_jitter_ms_max,
            drop_prob=self.drop_prob,
            seed=self.master_seed,
            echo_delay_ms=self.echo_delay_ms,
            echo_gain=self.echo_gain,
        )

    def with_master_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, master_seed=seed)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError(["config root must be a JSON object"])
        problems: list[str] = []

        geometry_name = None
        geom_raw = data.get("geometry", "cross5")
        if isinstance(geom_raw, str):
            if geom_raw in PRESETS:
                geometry_name = geom_raw
                geometry = PRESETS[geom_raw]
            else:
                problems.append(
                    f"geometry: unknown preset {geom_raw!r} (have {sorted(PRESETS)})"
                )
                geometry = PRESETS["cross5"]
        else:
            try:
                arr = np.asarray(geom_raw, dtype=np.float64)
                if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] not in (2, 3):
                    raise ValueError
                geometry = arr.tolist()
            except (TypeError, ValueError):
                problems.append("geometry: expected a preset name or an N x 2..3 coordinate list")
                geometry = PRESETS["cross5"]

        repetitions = _read(data, "", "repetitions", int, 5, problems)
        master_seed = _read(data, "", "master_seed", int, 0, problems)
        sample_rate_hz = _read(data, "", "sample_rate_hz", float, 48_000.0, problems)
        speed_mps = _read(data, "", "speed_mps", float, SPEED_OF_SOUND_MPS, problems)

        pulse = data.get("pulse", {})
        pulse_length = _read(pulse, "pulse.", "length", int, 1000, problems)
        pulse_upsample = _read(pulse, "pulse.", "upsample", int, 4, problems)
        carrier_hz = _read(pulse, "pulse.", "carrier_hz", float, 17_500.0, problems)

        sched = data.get("schedule", {})
        d_delay_ms = _read(sched, "schedule.", "d_delay_ms", float, 100.0, problems)
        t2_default = 2.0 * (d_delay_ms or 0.0) + len(geometry) * 100.0
        t2_ms = _read(sched, "schedule.", "t2_ms", float, t2_default, problems)

        chan = data.get("channel", {})
        noise_std = _read(chan, "channel.", "noise_std", float, 0.0, problems)
        attenuation = _read(chan, "channel.", "attenuation_exponent", float, 1.0, problems)
        jitter = _read(chan, "channel.", "os_jitter_ms_max", float, 0.0, problems)
        drop_prob = _read(chan, "channel.", "drop_prob", float, 0.0, problems)
        echo_delay = _read(chan, "channel.", "echo_delay_ms", float, 0.0, problems)
        echo_gain = _read(chan, "channel.", "echo_gain", float, 0.0, problems)

        det = data.get("detection", {})
        min_score_ratio = _read(det, "detection.", "min_score_ratio", float, 0.35, problems)
        rng_cfg = data.get("ranging", {})
        max_range_m = _read(rng_cfg, "ranging.", "max_range_m", float, MAX_RANGE_M, problems)

        fus = data.get("fusion", {})
        strategy = _read(fus, "fusion.", "strategy", str, "optimal", problems)
        variance_floor = _read(fus, "fusion.", "variance_floor", float, VARIANCE_FLOOR_M2, problems)
        variance_of = _read(fus, "fusion.", "variance_of", str, "distance", problems)

        sol = data.get("solver", {})
        solver_dim = _read(sol, "solver.", "dim", int, 2, problems)
        max_iters = _read(sol, "solver.", "max_iters", int, 500, problems)
        rel_tol = _read(sol, "solver.", "rel_tol", float, 1e-8, problems)
        init = _read(sol, "solver.", "init", str, "classical", problems)
        solver_seed = _read(sol, "solver.", "seed", int, 0, problems)

        # semantic checks; only meaningful once types parsed
        if not problems:
            if repetitions < 1:
                problems.append("repetitions: must be >= 1")
            if master_seed < 0:
                problems.append("master_seed: must be non-negative")
            if sample_rate_hz <= 0:
                problems.append("sample_rate_hz: must be positive")
            if speed_mps <= 0:
                problems.append("speed_mps: must be positive")
            if pulse_length < 1:
                problems.append("pulse.length: must be >= 1")
            if pulse_upsample < 1:
                problems.append("pulse.upsample: must be >= 1")
            if not 0.0 < carrier_hz < sample_rate_hz / 2.0:
                problems.append("pulse.carrier_hz: must be positive and below Nyquist")
            if d_delay_ms < 0:
                problems.append("schedule.d_delay_ms: must be non-negative")
            if t2_ms <= 2 * d_delay_ms:
                problems.append("schedule.t2_ms: must exceed twice d_delay_ms")
            if noise_std < 0:
                problems.append("channel.noise_std: must be non-negative")
            if attenuation < 0:
                problems.append("channel.attenuation_exponent: must be non-negative")
            if jitter < 0:
                problems.append("channel.os_jitter_ms_max: must be non-negative")
            if not 0.0 <= drop_prob <= 1.0:
                problems.append("channel.drop_prob: must lie in [0, 1]")
            if echo_delay < 0:
                problems.append("channel.echo_delay_ms: must be non-negative")
            if not 0.0 < min_score_ratio < 1.0:
                problems.append("detection.min_score_ratio: must lie strictly in (0, 1)")
            if max_range_m <= 0:
                problems.append("ranging.max_range_m: must be positive")
            if strategy not in ("equal", "optimal"):
                problems.append("fusion.strategy: must be 'equal' or 'optimal'")
            if strategy == "optimal" and repetitions < 2:
                problems.append("fusion.strategy: optimal weighting needs repetitions >= 2")
            if variance_floor <= 0:
                problems.append("fusion.variance_floor: must be positive")
            if variance_of not in ("distance", "squared"):
                problems.append("fusion.variance_of: must be 'distance' or 'squared'")
            if solver_dim not in (2, 3):
                problems.append("solver.dim: must be 2 or 3")
            if max_iters < 1:
                problems.append("solver.max_iters: must be >= 1")
            if rel_tol < 0:
                problems.append("solver.rel_tol: must be non-negative")
            if init not in ("classical", "random"):
                problems.append("solver.init: must be 'classical' or 'random'")
        if problems:
            raise ConfigError(problems)

        return cls(
            geometry=tuple(tuple(float(v) for v in row) for row in geometry),
            geometry_name=geometry_name,
            repetitions=repetitions,
            master_seed=master_seed,
            sample_rate_hz=sample_rate_hz,
            speed_mps=speed_mps,
            pulse_length=pulse_length,
            pulse_upsample=pulse_upsample,
            carrier_hz=carrier_hz,
            d_delay_ms=d_delay_ms,
            t2_ms=t2_ms,
            noise_std=noise_std,
            attenuation_exponent=attenuation,
            os_jitter_ms_max=jitter,
            drop_prob=drop_prob,
            echo_delay_ms=echo_delay,
            echo_gain=echo_gain,
            min_score_ratio=min_score_ratio,
            max_range_m=max_range_m,
            fusion_strategy=strategy,
            variance_floor=variance_floor,
            variance_of=variance_of,
            solver=SolverSettings(max_iters=max_iters, rel_tol=rel_tol, init=init, seed=solver_seed),
            solver_dim=solver_dim,
        )

    def to_dict(self) -> dict:
        """Lossless echo: parsing the result reproduces this config."""
        return {
            "geometry": self.geometry_name
            if self.geometry_name
            else [list(row) for row in self.geometry],
            "repetitions": self.repetitions,
            "master_seed": self.master_seed,
            "sample_rate_hz": self.sample_rate_hz,
            "speed_mps": self.speed_mps,
            "pulse": {
                "length": self.pulse_length,
                "upsample": self.pulse_upsample,
                "carrier_hz": self.carrier_hz,
            },
            "schedule": {"d_delay_ms": self.d_delay_ms, "t2_ms": self.t2_ms},
            "channel": {
                "noise_std": self.noise_std,
                "attenuation_exponent": self.attenuation_exponent,
                "os_jitter_ms_max": self.os_jitter_ms_max,
                "drop_prob": self.drop_prob,
                "echo_delay_ms": self.echo_delay_ms,
                "echo_gain": self.echo_gain,
            },
            "detection": {"min_score_ratio": self.min_score_ratio},
            "ranging": {"max_range_m": self.max_range_m},
            "fusion": {
                "strategy": self.fusion_strategy,
                "variance_floor": self.variance_floor,
                "variance_of": self.variance_of,
            },
            "solver": {
                "dim": self.solver_dim,
                "max_iters": self.solver.max_iters,
                "rel_tol": self.solver.rel_tol,
                "init": self.solver.init,
                "seed": self.solver.seed,
            },
        }


def _matrix(a: np.ndarray) -> list:
    return np.asarray(a).tolist()


def _toa_entries(report: DetectionReport) -> list:
    toa = report.toa
    return [
        [int(toa.sample[i, j]) if toa.present[i, j] else None for j in range(toa.n_phones)]
        for i in range(toa.n_phones)
    ]


@dataclass
class ScenarioResult:
    """Everything a run produced, in JSON-ready form."""

    config: dict
    meta: dict
    schedule: dict
    detections: list[dict]
    measurements: list[dict]
    fusion: dict
    truth: dict
    estimate: dict | None = None
    alignment: dict | None = None
    error: dict | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "meta": self.meta,
            "schedule": self.schedule,
            "detections": self.detections,
            "measurements": self.measurements,
            "fusion": self.fusion,
            "truth": self.truth,
            "estimate": self.estimate,
            "alignment": self.alignment,
            "error": self.error,
        }


def run_scenario(
    config: ScenarioConfig,
    out_dir: str | Path | None = None,
    dump_pcm: bool = False,
) -> ScenarioResult:
    """Execute the full pipeline for one scenario.

    With ``out_dir`` set, writes result.json, distances.csv and the report
    figures there (plus raw PCM when ``dump_pcm``). An under-constrained
    localization is reported inside the result instead of raising.
    """
    positions = config.positions()
    n = config.n_phones
    sched = make_schedule(n, config.d_delay_ms, config.t2_ms)
    pulses = session_pulses(
        n,
        length=config.pulse_length,
        upsample_factor=config.pulse_upsample,
        carrier_hz=config.carrier_hz,
        sample_rate_hz=config.sample_rate_hz,
        master_seed=config.master_seed,
    )
    channel = config.channel()

    sets: list[DistanceMeasurement] = []
    detections: list[dict] = []
    all_recordings = []
    for rep in range(config.repetitions):
        rng = np.random.default_rng([config.master_seed, rep])
        recordings, _ = simulate_session(positions, sched, pulses, channel, rng=rng)
        report = detect_session(recordings, pulses, config.min_score_ratio)
        dm = toa_to_distances(
            report.toa,
            config.sample_rate_hz,
            speed_mps=config.speed_mps,
            max_range_m=config.max_range_m,
        )
        sets.append(dm)
        detections.append(
            {
                "set_index": rep,
                "toa": _toa_entries(report),
                "missed": [list(p) for p in report.missed],
            }
        )
        all_recordings.append(recordings)

    ms = MeasurementSet(measurements=sets)
    prob = fuse(
        ms,
        strategy=config.fusion_strategy,
        variance_floor=config.variance_floor,
        dim=config.solver_dim,
        variance_of=config.variance_of,
    )
    mean_d, var_d, count = pair_stats(ms, of=config.variance_of)

    result = ScenarioResult(
        config=config.to_dict(),
        meta={
            "tool": "acoustloc",
            "version": __version__,
            "prng": "numpy-pcg64",
            "master_seed": config.master_seed,
        },
        schedule={
            "t1_ms": list(sched.t1_ms),
            "t2_ms": sched.t2_ms,
            "d0_ms": sched.d0_ms,
            "d_delay_ms": sched.d_delay_ms,
        },
        detections=detections,
        measurements=[
            {"set_index": k, "distance_m": _matrix(dm.d), "mask": _matrix(dm.mask)}
            for k, dm in enumerate(sets)
        ],
        fusion={
            "strategy": config.fusion_strategy,
            "weights": _matrix(prob.weights),
            "pair_mean_m": _matrix(mean_d),
            "pair_var": _matrix(var_d),
            "pair_count": _matrix(count),
        },
        truth={"positions": _matrix(positions.x)},
    )

    try:
        estimate, trace = sstress_solve(prob, config.solver)
    except UnderConstrainedError as exc:
        result.error = {"kind": "under_constrained", "detail": str(exc)}
    else:
        ar = align_and_score(estimate, positions)
        result.estimate = {
            "positions": _matrix(estimate.x),
            "cost_trace": list(trace),
            "n_sweeps": len(trace) - 1,
        }
        result.alignment = {
            "rotation": _matrix(ar.rotation),
            "translation": _matrix(ar.translation),
            "per_point_error_m": _matrix(ar.per_point_error),
            "mean_error_m": ar.mean_error,
        }

    if out_dir is not None:
        from . import report as report_mod

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_mod.write_result_json(result, out / "result.json")
        report_mod.write_distances_csv(sets, out / "distances.csv")
        if result.estimate is not None:
            ar_apply = np.asarray(result.estimate["positions"]) @ np.asarray(
                result.alignment["rotation"]
            ).T + np.asarray(result.alignment["translation"])
            report_mod.render_positions_figure(
                positions.x, ar_apply, out / "positions.png"
            )
            report_mod.render_cost_trace_figure(
                result.estimate["cost_trace"], out / "cost_trace.png"
            )
        if dump_pcm:
            for rep, recordings in enumerate(all_recordings):
                for rec in recordings:
                    write_pcm(rec, out / f"rec_set{rep}_phone{rec.phone_id}.pcm")
    return result


def compare_weighting(config: ScenarioConfig, seeds: list[int]) -> dict:
    """Run both fusion strategies on the same measurements, seed by seed.

    Every seed replaces the master seed, so the two strategies always see
    identical measurement sets and differ only in their weights.
    """
    if config.repetitions < 2:
        raise ConfigError(["repetitions: weighting comparison needs repetitions >= 2"])
    per_seed = []
    for seed in seeds:
        cfg = config.with_master_seed(int(seed))
        positions = cfg.positions()
        sched = make_schedule(cfg.n_phones, cfg.d_delay_ms, cfg.t2_ms)
        pulses = session_pulses(
            cfg.n_phones,
            length=cfg.pulse_length,
            upsample_factor=cfg.pulse_upsample,
            carrier_hz=cfg.carrier_hz,
            sample_rate_hz=cfg.sample_rate_hz,
            master_seed=cfg.master_seed,
        )
        sets = []
        for rep in range(cfg.repetitions):
            rng = np.random.default_rng([cfg.master_seed, rep])
            recordings, _ = simulate_session(positions, sched, pulses, cfg.channel(), rng=rng)
            report = detect_session(recordings, pulses, cfg.min_score_ratio)
            sets.append(
                toa_to_distances(
                    report.toa,
                    cfg.sample_rate_hz,
                    speed_mps=cfg.speed_mps,
                    max_range_m=cfg.max_range_m,
                )
            )
        ms = MeasurementSet(measurements=sets)
        entry: dict = {"seed": int(seed)}
        for strategy in ("equal", "optimal"):
            prob = fuse(
                ms,
                strategy=strategy,
                variance_floor=cfg.variance_floor,
                dim=cfg.solver_dim,
                variance_of=cfg.variance_of,
            )
            try:
                estimate, _ = sstress_solve(prob, cfg.solver)
            except UnderConstrainedError as exc:
                entry[f"{strategy}_error_m"] = None
                entry[f"{strategy}_failure"] = str(exc)
            else:
                entry[f"{strategy}_error_m"] = align_and_score(estimate, positions).mean_error
        per_seed.append(entry)

    eq = [e["equal_error_m"] for e in per_seed if e.get("equal_error_m") is not None]
    op = [e["optimal_error_m"] for e in per_seed if e.get("optimal_error_m") is not None]
    eq_mean = float(np.mean(eq)) if eq else None
    op_mean = float(np.mean(op)) if op else None
    ratio = (op_mean / eq_mean) if eq_mean and op_mean is not None and eq_mean > 0 else None
    return {
        "seeds": [int(s) for s in seeds],
        "per_seed": per_seed,
        "equal_mean_error_m": eq_mean,
        "optimal_mean_error_m": op_mean,
        "optimal_over_equal": ratio,
    }
