"""Command-line entry point.

Three subcommands: ``run`` executes a scenario config end to end, writing
JSON, CSV and figures; ``compare-weighting`` reruns a config across seeds
with both fusion strategies; ``validate`` checks a config and its schedule
feasibility without running anything. Failures exit nonzero with a JSON
diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import ConfigError, ScenarioConfig, compare_weighting, run_scenario
from .schedule import ScheduleConstraints, make_schedule, validate_schedule


def _fail(kind: str, **details) -> None:
    print(json.dumps({"error": kind, **details}), file=sys.stderr)


def _load_config(path: str) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"])
    return ScenarioConfig.from_dict(data)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(["--seed: must be non-negative"])
        config = config.with_master_seed(args.seed)
    result = run_scenario(config, out_dir=args.out, dump_pcm=args.dump_pcm)
    if result.error is not None:
        _fail(result.error["kind"], detail=result.error["detail"])
        return 1
    summary = {
        "n_phones": config.n_phones,
        "repetitions": config.repetitions,
        "mean_error_m": result.alignment["mean_error_m"],
        "n_sweeps": result.estimate["n_sweeps"],
    }
    if args.out:
        summary["out_dir"] = str(Path(args.out))
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_compare_weighting(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.seeds < 1:
        raise ConfigError(["--seeds: must be >= 1"])
    seeds = [config.master_seed + k for k in range(args.seeds)]
    summary = compare_weighting(config, seeds)
    if args.out:
        from . import report

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report.write_weighting_json(summary, out / "weighting.json")
        report.write_weighting_csv(summary, out / "weighting.csv")
        report.render_weighting_figure(summary, out / "weighting.png")
    print(
        json.dumps(
            {
                "equal_mean_error_m": summary["equal_mean_error_m"],
                "optimal_mean_error_m": summary["optimal_mean_error_m"],
                "optimal_over_equal": summary["optimal_over_equal"],
                "n_seeds": len(seeds),
            },
            indent=2,
        )
    )
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    sched = make_schedule(config.n_phones, config.d_delay_ms, config.t2_ms)
    pulse_ms = 1000.0 * config.pulse_length * config.pulse_upsample / config.sample_rate_hz
    constraints = ScheduleConstraints(
        delay_os_ms=config.os_jitter_ms_max, delta_ms=pulse_ms
    )
    violations = validate_schedule(sched, constraints)
    if violations:
        _fail("infeasible-schedule", violations=violations)
        return 1
    print(
        json.dumps(
            {
                "ok": True,
                "n_phones": config.n_phones,
                "t1_ms": list(sched.t1_ms),
                "t2_ms": sched.t2_ms,
                "d0_ms": sched.d0_ms,
                "pulse_ms": pulse_ms,
            },
            indent=2,
        )
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="acoustloc",
        description="Acoustic ranging and relative localization scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config end to end")
    p_run.add_argument("--config", required=True, help="scenario config JSON")
    p_run.add_argument("--out", default=None, help="directory for result.json, CSV and figures")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument(
        "--dump-pcm", action="store_true", help="also write raw float32 recordings"
    )
    p_run.set_defaults(func=_cmd_run)

    p_cw = sub.add_parser(
        "compare-weighting", help="equal vs optimal fusion over consecutive seeds"
    )
    p_cw.add_argument("--config", required=True, help="scenario config JSON")
    p_cw.add_argument("--seeds", type=int, default=20, help="number of seeds to run")
    p_cw.add_argument("--out", default=None, help="directory for weighting.{json,csv,png}")
    p_cw.set_defaults(func=_cmd_compare_weighting)

    p_val = sub.add_parser("validate", help="check a config and its schedule feasibility")
    p_val.add_argument("--config", required=True, help="scenario config JSON")
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail("invalid-config", problems=exc.problems)
        return 2
    except ValueError as exc:
        _fail("invalid-argument", detail=str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
