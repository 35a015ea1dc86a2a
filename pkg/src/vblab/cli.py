"""Command-line entry point.

Subcommands:

* ``run CONFIG``      — execute a config (all its seeds), write record JSONs.
* ``sweep CONFIG``    — re-run the config across an axis (e.g. ``--axis V=1..5``).
* ``curve``           — emit spaced-repetition retention curves or their areas as CSV.
* ``report DIR``      — summarise previously written records as CSV.

Exit codes: 0 success, 2 configuration problems, 3 data problems,
1 anything else the package raises deliberately.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, DataError, VblabError
from .runner import (
    AXIS_PATHS,
    aggregate,
    execute_run,
    load_records,
    report,
    set_axis_value,
    write_records,
)
from .spacing import SpacingParams, generate_curves, optimal_interval

OUTPUT_ROOT_ENV = "VBLAB_OUTPUT_ROOT"


def _load_config_file(path: str) -> dict:
    from .config import load_config

    return load_config(path)


def _resolve_out_dir(config: dict, override: str | None) -> str:
    if override:
        return override
    root = os.environ.get(OUTPUT_ROOT_ENV)
    out = config.get("output_dir", "runs")
    return os.path.join(root, out) if root else out


def parse_axis(spec: str) -> tuple[str, list]:
    """Parse ``NAME=1..5`` (inclusive integer range) or ``NAME=a,b,c``."""
    if "=" not in spec:
        raise ConfigError(f"axis must look like NAME=VALUES, got {spec!r}")
    name, _, raw = spec.partition("=")
    name = name.strip()
    if name not in AXIS_PATHS:
        raise ConfigError(f"unknown sweep axis {name!r}; choose from {sorted(AXIS_PATHS)}")
    raw = raw.strip()
    if ".." in raw:
        lo_s, _, hi_s = raw.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise ConfigError(f"range bounds must be integers, got {raw!r}") from exc
        if hi < lo:
            raise ConfigError(f"empty axis range {raw!r}")
        return name, list(range(lo, hi + 1))
    values: list = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(int(part))
        except ValueError:
            try:
                values.append(float(part))
            except ValueError:
                values.append(part)
    if not values:
        raise ConfigError(f"axis {name!r} has no values")
    return name, values


def _print_aggregate(records, stream=None) -> None:
    stream = stream or sys.stdout
    agg = aggregate(records)
    for key in sorted(agg):
        entry = agg[key]
        stream.write(f"{key}: mean={entry['mean']:.6f} std={entry['std']:.6f} n={entry['n']}\n")


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config_file(args.config)
    seeds = [args.seed] if args.seed is not None else config["seeds"]
    records = [execute_run(config, seed) for seed in seeds]
    out_dir = _resolve_out_dir(config, args.out)
    paths = write_records(records, out_dir)
    for path in paths:
        print(path)
    _print_aggregate(records)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config_file(args.config)
    axis, values = parse_axis(args.axis)
    out_dir = _resolve_out_dir(config, args.out)
    all_records = []
    for value in values:
        clone = set_axis_value(config, axis, value)
        from .config import validate_config

        clone = validate_config(clone)
        records = [execute_run(clone, seed) for seed in clone["seeds"]]
        all_records.extend(records)
        write_records(records, out_dir)
        print(f"# {axis}={value}")
        _print_aggregate(records)
    print(report(all_records), end="")
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    params = SpacingParams(
        initial_retention=args.initial_retention,
        time_scale=args.time_scale,
        curvature=args.curvature,
        log_optimal=args.log_optimal,
    )
    if args.intervals:
        intervals = [float(v) for v in args.intervals.split(",") if v.strip()]
    else:
        best = optimal_interval(params.log_optimal)
        intervals = [best / 4.0, best, 4.0 * best]
    curves = generate_curves(params, intervals, args.horizon, args.repetitions)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.areas:
            out.write("interval,area\n")
            for curve in curves:
                out.write(f"{curve.interval!r},{curve.area()!r}\n")
        else:
            out.write("interval,time,value\n")
            for curve in curves:
                for t, v in zip(curve.times, curve.values):
                    out.write(f"{curve.interval!r},{float(t)!r},{float(v)!r}\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    records = load_records(args.records)
    if not records:
        raise DataError(f"no record JSONs found under {args.records!r}")
    text = report(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vblab",
        description="Continual-learning lab: view-batch replay scheduling and baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config across its seeds")
    p_run.add_argument("config", help="path to a JSON config file")
    p_run.add_argument("--seed", type=int, default=None, help="run a single seed instead")
    p_run.add_argument("--out", default=None, help="directory for record JSONs")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a config across one axis")
    p_sweep.add_argument("config", help="path to a JSON config file")
    p_sweep.add_argument(
        "--axis", required=True, help="axis spec, e.g. V=1..5 or lr=0.01,0.05,0.1"
    )
    p_sweep.add_argument("--out", default=None, help="directory for record JSONs")
    p_sweep.set_defaults(func=cmd_sweep)

    p_curve = sub.add_parser("curve", help="emit retention curves as CSV")
    p_curve.add_argument("--intervals", default=None, help="comma list of recall intervals")
    p_curve.add_argument("--horizon", type=float, default=100.0)
    p_curve.add_argument("--repetitions", type=int, default=3)
    p_curve.add_argument("--initial-retention", type=float, default=0.95)
    p_curve.add_argument("--time-scale", type=float, default=0.2)
    p_curve.add_argument("--curvature", type=float, default=0.4)
    p_curve.add_argument("--log-optimal", type=float, default=SpacingParams().log_optimal)
    p_curve.add_argument("--areas", action="store_true", help="emit areas instead of points")
    p_curve.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p_curve.set_defaults(func=cmd_curve)

    p_report = sub.add_parser("report", help="summarise stored records as CSV")
    p_report.add_argument("records", help="directory containing record JSONs")
    p_report.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except VblabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON ({exc})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
