import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .core.errors import CfNomaError, ConfigParseError, InvalidConfigError
from .core.logger import error_logger, msg_logger
from .services.config_loader import parse_config
from .services.experiment_service import ExperimentService

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURES = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfnoma", description="Cell-free massive MIMO-NOMA downlink simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario sweep and write the raw result tables")
    run.add_argument("--config", required=True, help="Scenario JSON file or a manifest.json of an earlier run")
    run.add_argument("--out", help="Output directory (defaults to the scenario's `output` key)")
    run.add_argument("--threads", type=int, default=None, help="Topology tasks evaluated concurrently")

    reduce = commands.add_parser("reduce", help="Average a results.csv per sweep point")
    reduce.add_argument("--in", dest="source", required=True, help="results.csv written by `cfnoma run`")
    reduce.add_argument("--out", required=True, help="Summary CSV to write")
    reduce.add_argument("--bandwidth-mhz", type=float, default=None, help="Adds the mean throughput in Mbit/s")

    verify = commands.add_parser("verify", help="Check the closed-form SINR terms against Monte Carlo")
    verify.add_argument("--config", required=True, help="Scenario JSON file")
    verify.add_argument("--threads", type=int, default=None, help="Threads per Monte Carlo run")
    return parser


# ---
# Run
# ---
def _run(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    out = args.out or config.output
    if not out:
        raise ConfigParseError("no output directory given and the scenario has none", "output")
    service = ExperimentService(workers=args.threads)
    result = service.run_sweep(config, threads=args.threads)
    path = service.write_outputs(result, out)
    print(f"wrote {len(result.results)} rows to {path / 'results.csv'}")
    if result.failures:
        error_logger.warning("%d evaluations failed, see the status column", result.failures)
        return EXIT_FAILURES
    return EXIT_OK


# ------
# Reduce
# ------
def _reduce(args: argparse.Namespace) -> int:
    source = Path(args.source)
    if not source.is_file():
        raise ConfigParseError(f"results file not found: {source}")
    summary = ExperimentService.reduce_results(source, bandwidth_mhz=args.bandwidth_mhz)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    summary.to_csv(args.out, index=False)
    print(f"wrote {len(summary)} sweep points to {args.out}")
    return EXIT_OK


# ------
# Verify
# ------
def _verify(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    reports = ExperimentService(workers=args.threads).verify(config)
    for topology, report in enumerate(reports):
        errors = ", ".join(f"{term}={err:.4f}" for term, err in report.term_errors.items())
        print(f"topology {topology}: {'PASS' if report.passed else 'FAIL'} ({errors})")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILURES


COMMANDS = {"run": _run, "reduce": _reduce, "verify": _verify}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    msg_logger.debug("cfnoma %s", args.command)
    try:
        return COMMANDS[args.command](args)
    except (ConfigParseError, InvalidConfigError) as exc:
        error_logger.error("configuration error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CfNomaError as exc:
        error_logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except ValueError as exc:
        # model parameters rejected while deriving a system from the scenario
        error_logger.error("configuration error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
