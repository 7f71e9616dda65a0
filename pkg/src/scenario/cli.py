"""Command-line front end: skybridge run | report | sweep"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from src import __version__
from src.errors import SkybridgeError, ValidationError
from src.scenario.config import load_config
from src.scenario.runner import ScenarioRunner, report, resolve_run_dir, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skybridge",
        description="LEO in-flight coverage and in-cabin propagation simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_run_options(sub: argparse.ArgumentParser):
        sub.add_argument("config", help="Path to the scenario TOML file")
        sub.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                         help="Override a scenario value (repeatable)")
        sub.add_argument("--threads", type=int, default=1, help="Worker threads (results never depend on it)")
        sub.add_argument("--out", default=None, help="Run directory (default: $SKYBRIDGE_OUT/<name> or runs/<name>)")
        sub.add_argument("--no-progress", action="store_true", help="Hide progress bars")

    add_run_options(subparsers.add_parser("run", help="Run a coverage or cabin scenario"))

    report_parser = subparsers.add_parser("report", help="Summarize a run and write plot-ready tables")
    report_parser.add_argument("run_dir", help="Directory holding run_manifest.json")

    sweep_parser = subparsers.add_parser("sweep", help="Rerun a coverage scenario over values of one key")
    add_run_options(sweep_parser)
    sweep_parser.add_argument("--key", default="constellation.mask.beam_half_angle_deg",
                              help="Dotted configuration key to sweep")
    sweep_parser.add_argument("--values", nargs="+", required=True, help="Values to assign to the key")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def _run(args) -> int:
    if args.threads < 1:
        raise ValidationError("--threads must be at least 1", key="threads")
    loaded = load_config(args.config, args.overrides)
    runner = ScenarioRunner(loaded, run_dir=resolve_run_dir(loaded, args.out), threads=args.threads,
                            progress=not args.no_progress)
    stats = runner.run()
    for key, value in stats.items():
        if key != "elapsed_seconds":
            print(f"{key}: {value}")
    print(f"outputs: {runner.store.run_dir}")
    return EXIT_OK


def _report(args) -> int:
    for line in report(args.run_dir):
        print(line)
    return EXIT_OK


def _sweep(args) -> int:
    if args.threads < 1:
        raise ValidationError("--threads must be at least 1", key="threads")
    rows = sweep(args.config, args.key, args.values, overrides=args.overrides, run_dir=args.out,
                 threads=args.threads, progress=not args.no_progress)
    for row in rows:
        print(f"{args.key}={row['value']}: {row['coverage_pct']}% coverage, {row['n_handovers']} handovers")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns 0 on success, 2 on validation errors, 1 otherwise"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    handlers = {"run": _run, "report": _report, "sweep": _sweep}
    try:
        return handlers[args.command](args)
    except ValidationError as e:
        logger.error(str(e))
        return EXIT_VALIDATION
    except SkybridgeError as e:
        logger.error(str(e))
        logger.debug("Traceback", exc_info=True)
        return EXIT_RUNTIME
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        logger.debug("Traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
