# file: main.py

import argparse
import logging
import os
import sys

# Add the current directory to Python path
current_dir = os.path.dirname(os.path.abspath(__file__))
if current_dir not in sys.path:
    sys.path.insert(0, current_dir)

from cli.commands import (EXIT_FAILED, EXIT_USAGE, cmd_analyze, cmd_bounds, cmd_run, cmd_scenario_export,
                          cmd_scenario_list, cmd_verify, parse_params)
from cli.config import ALGORITHMS, ExperimentConfig
from cli.report import format_key_values
from data_io import dumps_record
from errors import ClockSyncError, InvalidInputError, PreconditionError

LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clocksync",
                                     description="Self-stabilizing clock synchronization on dynamic graphs")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbosity", type=int, choices=(0, 1, 2), default=1)

    p_run = sub.add_parser("run", parents=[common], help="execute seeded runs and check the applicable bounds")
    p_run.add_argument("--config", help="JSON experiment config; explicit flags override it")
    p_run.add_argument("--dump-config", help="write the effective config to this file")
    p_run.add_argument("--algorithm", choices=ALGORITHMS)
    p_run.add_argument("--period", type=int)
    p_run.add_argument("--growth", help="constant:M | successor | affine | table:v0,v1,...")
    p_run.add_argument("--factor", type=int, help="M of the fixed-period clocks")
    source = p_run.add_mutually_exclusive_group()
    source.add_argument("--scenario")
    source.add_argument("--schedule")
    p_run.add_argument("--param", action="append", default=[], help="scenario parameter key=value")
    p_run.add_argument("--init", help="preset | random | schedule file with an init section")
    p_run.add_argument("--horizon", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--reps", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--no-early-stop", "--full-horizon", dest="full_horizon", action="store_true",
                       help="run to the horizon even after synchronization is confirmed")
    p_run.add_argument("--delta-cap", type=int)

    p_analyze = sub.add_parser("analyze", parents=[common], help="classify a schedule file")
    p_analyze.add_argument("schedule")
    p_analyze.add_argument("--delta-cap", type=int, default=8)

    p_verify = sub.add_parser("verify", parents=[common], help="check a scenario's expected closed forms and verdict")
    p_verify.add_argument("scenario")
    p_verify.add_argument("--param", action="append", default=[])
    p_verify.add_argument("--horizon", type=int)

    p_scenario = sub.add_parser("scenario", help="list or export scenarios")
    scenario_sub = p_scenario.add_subparsers(dest="scenario_command", required=True)
    scenario_sub.add_parser("list", parents=[common])
    p_export = scenario_sub.add_parser("export", parents=[common])
    p_export.add_argument("name")
    p_export.add_argument("--param", action="append", default=[])
    p_export.add_argument("-o", "--output", required=True)

    p_bounds = sub.add_parser("bounds", parents=[common], help="print the stabilization-time and memory bound tables")
    p_bounds.add_argument("--diameter", type=int, required=True)
    p_bounds.add_argument("--period", type=int, required=True)
    p_bounds.add_argument("--growth", default="successor")
    p_bounds.add_argument("--h0", type=int, default=0)
    p_bounds.add_argument("--radius", type=int)
    p_bounds.add_argument("--center-diameter", type=int)
    p_bounds.add_argument("--bound", type=int, help="known diameter bound B (defaults to D)")
    p_bounds.add_argument("-n", type=int, help="node count for the literature rows")
    p_bounds.add_argument("--m0-max", type=int, default=1)
    return parser


def config_from_args(args) -> ExperimentConfig:
    """Start from ``--config`` if given, then apply every explicitly passed flag."""
    base = ExperimentConfig.load(args.config).to_dict() if args.config else {}
    overrides = {
        "algorithm": args.algorithm, "period": args.period, "growth": args.growth, "factor": args.factor,
        "scenario": args.scenario, "schedule": args.schedule, "init": args.init, "horizon": args.horizon,
        "seed": args.seed, "reps": args.reps, "out": args.out, "delta_cap": args.delta_cap,
    }
    data = dict(base)
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.scenario is not None:
        data["schedule"] = None
    if args.schedule is not None:
        data["scenario"] = None
    if args.param:
        data["scenario_params"] = parse_params(args.param)
    if args.full_horizon:
        data["early_stop"] = False
    data["verbosity"] = args.verbosity
    return ExperimentConfig.from_dict(data)


def dispatch(args) -> int:
    if args.command == "run":
        config = config_from_args(args)
        if args.dump_config:
            config.save(args.dump_config)
        report, status = cmd_run(config)
        print(report.format_table())
        print(report.to_jsonl(), end="")
        return status
    if args.command == "analyze":
        record, status = cmd_analyze(args.schedule, args.delta_cap)
        print(format_key_values(record))
        print(dumps_record(record))
        return status
    if args.command == "verify":
        report, status = cmd_verify(args.scenario, parse_params(args.param), args.horizon)
        print(report.format_table())
        print(report.to_jsonl(), end="")
        return status
    if args.command == "scenario":
        if args.scenario_command == "list":
            print("\n".join(cmd_scenario_list()))
            return 0
        return cmd_scenario_export(args.name, parse_params(args.param), args.output)
    rows, status = cmd_bounds(args.diameter, args.period, args.growth, args.h0, args.radius,
                              args.center_diameter, args.bound, args.n, args.m0_max)
    for row in rows:
        value = "-" if row["value"] is None else row["value"]
        tag = "  (literature)" if row["reference_only"] else ""
        print(f"{row['table']:<14} {row['algorithm']:<10} {row['assumption']:<40} {row['formula']} = {value}{tag}")
    return status


def _fail(error: Exception, status: int) -> int:
    logging.error(f"{type(error).__name__}: {error}")
    print(dumps_record({"type": "error", "error": type(error).__name__, "message": str(error), "status": status}))
    return status


def main(argv=None) -> int:
    """Parse arguments, configure logging and map errors onto exit statuses."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=LOG_LEVELS[args.verbosity], format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except (InvalidInputError, PreconditionError, FileNotFoundError) as e:
        return _fail(e, EXIT_USAGE)
    except ClockSyncError as e:
        return _fail(e, EXIT_FAILED)


if __name__ == "__main__":
    sys.exit(main())
