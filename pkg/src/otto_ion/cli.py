"""Command line entry point ``otto-ion``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import (
    DEFAULT_GRIDS,
    ConfigError,
    SweepKind,
    SweepSpec,
    default_policy,
    default_times,
    load_config,
    parse_config,
    parse_grid,
    validate_spec,
)
from .engine import MeasurementPolicy, StrokeTimes
from .experiments import run_experiment
from .plotdata import SchemaError, emit_plotdata

EXIT_OK, EXIT_CONFIG, EXIT_SIMULATION = 0, 1, 2

RUN_COMMANDS = {
    "single": SweepKind.SINGLE_CYCLE,
    "sweep-t1": SweepKind.SWEEP_T1,
    "sweep-tau": SweepKind.SWEEP_TAU,
    "multicycle": SweepKind.MULTI_CYCLE,
}

# figure presets: kind, grid, (t_heat, tau), cycles, policy
PRESETS = {
    "fig3": (SweepKind.SWEEP_T1, "5:100:5", (None, 256.0), None, None),
    "fig4": (SweepKind.SWEEP_T1, "10:100:2", (None, 256.0), None, None),
    "fig5": (SweepKind.SWEEP_TAU, "2:30:2, 32, 48, 64, 96, 128, 192, 256", (100.0, None), None, None),
    "fig6": (SweepKind.MULTI_CYCLE, "", (25.0, 11.0), 20, MeasurementPolicy.FEEDBACK_PI_PULSE),
}


def _base_spec(path):
    return load_config(path) if path else parse_config("")


def build_spec(command, args):
    """Resolve the :class:`SweepSpec` for a run or preset subcommand."""
    base = _base_spec(args.config)
    if command in PRESETS:
        kind, grid, (t_heat, tau), cycles, policy = PRESETS[command]
        times0 = default_times(kind)
        spec = dataclasses.replace(
            base,
            kind=kind,
            grid=parse_grid(grid),
            times=StrokeTimes(t_heat or times0.t_heat, tau or times0.tau),
            cycles=cycles or base.cycles,
            policy=policy or default_policy(kind),
            output_path=f"{command}.csv",
        )
    else:
        kind = RUN_COMMANDS[command]
        spec = base
        if base.kind is not kind:
            # the subcommand wins over a kind line in the file
            spec = dataclasses.replace(
                base,
                kind=kind,
                grid=base.grid or parse_grid(DEFAULT_GRIDS.get(kind, "")),
                times=base.times if args.config else default_times(kind),
                policy=base.policy if args.config else default_policy(kind),
            )
    if args.step_size is not None:
        if not args.step_size > 0:
            raise ConfigError(f"--step-size must be > 0, got {args.step_size}")
        spec = dataclasses.replace(spec, step_size=args.step_size)
    if args.policy is not None:
        spec = dataclasses.replace(spec, policy=MeasurementPolicy(args.policy))
    validate_spec(spec)
    return spec


def _add_run_options(p):
    p.add_argument("--config", metavar="PATH", help="key=value configuration file")
    p.add_argument("--out", metavar="PATH", help="output CSV path")
    p.add_argument("--step-size", type=float, metavar="H", help="RK4 step size")
    p.add_argument("--policy", choices=[m.value for m in MeasurementPolicy], help="measurement stroke policy")
    p.add_argument("--workers", type=int, metavar="N", help="sweep worker threads")


def make_parser():
    parser = argparse.ArgumentParser(prog="otto-ion", description="Finite-time single-ion quantum Otto engine.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUN_COMMANDS:
        _add_run_options(sub.add_parser(name, help=f"run a {name} experiment"))
    for name in PRESETS:
        _add_run_options(sub.add_parser(name, help=f"{name} preset; also writes plot data"))
    sub.add_parser("validate", help="run the quick property checks")
    pd = sub.add_parser("plotdata", help="write two-column plot files from a CSV")
    pd.add_argument("csv", metavar="CSV")
    pd.add_argument("--out", metavar="DIR", help="output directory")
    return parser


def _run(command, args):
    try:
        spec = build_spec(command, args)
    except (ConfigError, OSError) as exc:
        print(f"otto-ion: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(spec, out=args.out, workers=args.workers)
    print(f"wrote {result.csv_path}")
    print(f"wrote {result.manifest_path}")
    if command in PRESETS:
        for path in emit_plotdata(result.csv_path):
            print(f"wrote {path}")
    if result.failures:
        print(f"otto-ion: {result.failures} of {len(result.rows)} points failed", file=sys.stderr)
        return EXIT_SIMULATION
    return EXIT_OK


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "validate":
        from .validate import run_validation

        return EXIT_OK if run_validation() else EXIT_SIMULATION
    if args.command == "plotdata":
        try:
            paths = emit_plotdata(args.csv, args.out)
        except (SchemaError, OSError, StopIteration) as exc:
            print(f"otto-ion: {exc or 'empty CSV'}", file=sys.stderr)
            return EXIT_CONFIG
        for path in paths:
            print(f"wrote {path}")
        return EXIT_OK
    return _run(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
