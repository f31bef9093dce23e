"""Command-line front end: ``aebsim run | compare | verify | config``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from aebsim._errors import AebException, ConfigError, InvalidParameter
from aebsim.command import Controller
from aebsim.config import load_config, write_config
from aebsim.simulation import SimulationConfig, SimulationResult, run_scenario
from aebsim.trace import (
    format_comparison,
    write_metrics,
    write_plot_csv,
    write_trace_csv,
)
from aebsim.verify import SUITES, format_results, run_checks

logger = logging.getLogger("aebsim")

OUT_DIR_ENV = "AEB_OUT_DIR"
DEFAULT_OUT_DIR = Path("aeb-out")
CONFIG_FILE_NAME = "aebsim.toml"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def output_dir(arg: Path | None) -> Path:
    if arg is not None:
        return arg
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else DEFAULT_OUT_DIR


def effective_config(args: argparse.Namespace) -> SimulationConfig:
    """Defaults, then the scenario file, then command-line overrides."""
    config = load_config(args.scenario) if args.scenario is not None else SimulationConfig()
    overrides: dict[str, object] = {}
    if getattr(args, "controller", None) is not None:
        overrides["controller"] = Controller(args.controller)
    if args.dt is not None:
        overrides["dt"] = args.dt
    if not overrides:
        return config
    try:
        return replace(config, scenario=replace(config.scenario, **overrides))
    except InvalidParameter as e:
        raise ConfigError(str(e).removeprefix(f"{e.field}: "), field=e.field) from e


def write_run(result: SimulationResult, config: SimulationConfig, out: Path) -> None:
    stem = f"{config.scenario.name}-{config.scenario.controller.value}"
    write_trace_csv(result.trace, out / f"{stem}.trace.csv")
    write_metrics(result.metrics, out / f"{stem}.metrics.txt")
    write_plot_csv({config.scenario.controller.value: result.trace}, out / f"{stem}.plot.csv")
    write_config(config, out / f"{stem}.config.toml")
    logger.info("Wrote %s.{trace.csv,metrics.txt,plot.csv,config.toml} to %s", stem, out)


def cmd_run(args: argparse.Namespace) -> int:
    config = effective_config(args)
    out = output_dir(args.out)
    result = run_scenario(config)
    out.mkdir(parents=True, exist_ok=True)
    write_run(result, config, out)
    print(f"final_gap = {result.metrics.final_gap:.9g}, collision = {result.metrics.collision}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = effective_config(args)
    out = output_dir(args.out)
    configs = {
        c.value: replace(config, scenario=replace(config.scenario, controller=c))
        for c in Controller
    }
    with ThreadPoolExecutor(max_workers=len(configs)) as pool:
        futures = {name: pool.submit(run_scenario, c) for name, c in configs.items()}
        results = {name: future.result() for name, future in futures.items()}

    out.mkdir(parents=True, exist_ok=True)
    for name, result in results.items():
        write_run(result, configs[name], out)
    stem = f"{config.scenario.name}-compare"
    table = format_comparison({name: result.metrics for name, result in results.items()})
    (out / f"{stem}.metrics.txt").write_text(table, encoding="utf-8")
    traces = {name: result.trace for name, result in results.items()}
    write_plot_csv(traces, out / f"{stem}.plot.csv")
    print(table, end="")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = load_config(args.scenario) if args.scenario is not None else SimulationConfig()
    results = run_checks(config, args.only)
    print(format_results(results), end="")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def cmd_config(args: argparse.Namespace) -> int:
    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / CONFIG_FILE_NAME
    write_config(SimulationConfig(), path)
    logger.info("Wrote reference scenario file %s", path)
    print(path)
    return EXIT_OK


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        msg = f"not a number: {value!r}"
        raise argparse.ArgumentTypeError(msg) from None
    if not number > 0:
        msg = f"must be positive: {value!r}"
        raise argparse.ArgumentTypeError(msg)
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aebsim",
        description="Autonomous emergency braking simulator with SMC and LQR wheel-slip control.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more log output (repeatable)"
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    commands = parser.add_subparsers(dest="command", required=True)

    def scenario_options(sub: argparse.ArgumentParser, *, required: bool) -> None:
        sub.add_argument(
            "--scenario",
            type=Path,
            required=required,
            metavar="PATH",
            help="TOML scenario file",
        )

    def output_option(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "--out",
            type=Path,
            metavar="DIR",
            help=f"output directory (default: ${OUT_DIR_ENV}, then ./{DEFAULT_OUT_DIR})",
        )

    def dt_option(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--dt", type=positive_float, metavar="SECONDS", help="override step size")

    run = commands.add_parser("run", help="simulate one controller")
    scenario_options(run, required=True)
    run.add_argument("--controller", choices=[c.value for c in Controller])
    output_option(run)
    dt_option(run)
    run.set_defaults(handler=cmd_run)

    compare = commands.add_parser("compare", help="simulate both controllers side by side")
    scenario_options(compare, required=True)
    output_option(compare)
    dt_option(compare)
    compare.set_defaults(handler=cmd_compare)

    verify = commands.add_parser("verify", help="run the built-in verification suites")
    scenario_options(verify, required=False)
    verify.add_argument("--only", choices=list(SUITES), metavar="SUITE", help="run one suite")
    verify.set_defaults(handler=cmd_verify)

    config = commands.add_parser("config", help="write the annotated default scenario file")
    output_option(config)
    config.set_defaults(handler=cmd_config)

    return parser


def configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        status: int = args.handler(args)
    except ConfigError as e:
        print(f"aebsim: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AebException, OSError) as e:
        print(f"aebsim: error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return status
