"""EMP inference command line.

Commands:
  - solve: run EMP-cyclic or EMP-greedy on one model file
  - experiment: run a seeded experiment battery from a JSON spec
  - verify: check the convergence theory on a battery of models
  - bounds: print the theory constants of one model file

Output directory:
  - CLI --out-dir
  - Or environment variable EMP_OUT_DIR
  - Or a .env file containing EMP_OUT_DIR (loaded automatically; set variables win)
  - Otherwise ./emp_out

Exit codes:
  0 success, 1 error, 2 the solver hit its iteration cap.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
from collections.abc import Iterable
from pathlib import Path

from dotenv import load_dotenv

from .artifacts import load_json_object, load_model, write_csv_atomic, write_json_atomic
from .const import (
    BOUNDS_FILE,
    DEFAULT_EPSILON,
    DEFAULT_ETA,
    DEFAULT_ORACLE_PAIRS,
    DEFAULT_OUT_DIR,
    DEFAULT_VERIFY_ETA,
    DEFAULT_WORKERS,
    ENV_OUT_DIR,
    ENV_WORKERS,
    EXIT_ERROR,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    LOGGER_NAME,
    RESULT_FILE,
    ROUND_TRIP_STEPS,
    TRACE_FILE,
    VERIFY_FILE,
)
from .core import EmpError, bounds_report
from .experiment import ExperimentSpec, run_experiment
from .solver import EmpSolver, SolverConfig, Variant
from .verify import default_battery, model_battery, run_verify, spec_battery

_LOGGER = logging.getLogger(LOGGER_NAME)

# ---------------------------
# Basic utilities
# ---------------------------


def setup_logging(verbose: bool) -> None:
    """Configure global console logging.

    Args:
        verbose: If True, sets log level to DEBUG. Otherwise INFO.
    """
    handler = logging.StreamHandler()

    try:
        from colorlog import ColoredFormatter

        handler.setFormatter(
            ColoredFormatter(
                "%(log_color)s%(levelname)-8s%(reset)s: %(message)s",
                log_colors={
                    "DEBUG": "cyan",
                    "INFO": "green",
                    "WARNING": "yellow",
                    "ERROR": "red",
                    "CRITICAL": "bold_red",
                },
            )
        )
    except Exception:
        handler.setFormatter(logging.Formatter("%(levelname)-8s: %(message)s"))

    root = logging.getLogger()
    root.handlers[:] = []
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def resolve_out_dir(value: str | None) -> Path:
    """Output directory from the flag, then `EMP_OUT_DIR`, then the default."""
    return Path(value or os.getenv(ENV_OUT_DIR) or DEFAULT_OUT_DIR)


def resolve_workers(value: int | None) -> int:
    """Pool size from the flag, then `EMP_WORKERS`, then the default."""
    if value is not None:
        return value
    raw = os.getenv(ENV_WORKERS)
    if not raw:
        return DEFAULT_WORKERS
    try:
        return max(1, int(raw))
    except ValueError:
        _LOGGER.warning("Ignoring non-integer %s=%r", ENV_WORKERS, raw)
        return DEFAULT_WORKERS


def apply_dotenv_if_present() -> None:
    """Load `.env` from the working directory if it exists.

    Variables already present in the environment win.
    """
    path = Path.cwd() / ".env"
    if path.exists():
        load_dotenv(path, override=False)


# ---------------------------
# Commands
# ---------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    """Handle the `solve` subcommand.

    Writes `result.json`, plus `trace.csv` with `--trace` and `bounds.json`
    with `--bounds`.

    Returns:
        0 on convergence, 2 when the iteration cap was hit.
    """
    model = load_model(Path(args.model))
    config = SolverConfig(
        eta=float(args.eta),
        epsilon=float(args.epsilon),
        max_iterations=args.max_iterations,
        variant=Variant(args.variant),
        record_trace=bool(args.trace),
        assert_theory=bool(args.assert_theory),
    )
    out_dir = resolve_out_dir(args.out_dir)

    if args.bounds:
        report = bounds_report(model, config.eta, config.epsilon, delta=args.delta)
        path = write_json_atomic(out_dir / BOUNDS_FILE, report.to_json_dict())
        _LOGGER.info("Wrote %s", path)

    result = EmpSolver(model, config).run()
    path = write_json_atomic(out_dir / RESULT_FILE, result.to_json_dict())
    _LOGGER.info("Wrote %s", path)
    if result.trace is not None:
        path = write_csv_atomic(
            out_dir / TRACE_FILE, result.trace.csv_header(), result.trace.to_csv_rows()
        )
        _LOGGER.info("Wrote %s", path)

    print(json.dumps(result.to_json_dict(), sort_keys=True))
    if not result.converged:
        _LOGGER.warning(
            "Not converged after %d iterations (max violation %.3e)",
            result.iterations_used,
            result.max_violation,
        )
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    """Handle the `experiment` subcommand."""
    spec = ExperimentSpec.from_json_dict(load_json_object(Path(args.spec)))
    if args.seed is not None:
        spec = dataclasses.replace(spec, base_seed=int(args.seed))
    report = run_experiment(spec, workers=resolve_workers(args.workers))
    for path in report.write(resolve_out_dir(args.out_dir)):
        _LOGGER.info("Wrote %s", path)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Handle the `verify` subcommand.

    Returns:
        0 when every property passed, 1 otherwise.
    """
    eta = float(args.eta)
    if args.model:
        battery = model_battery(
            load_model(Path(args.model)), eta=eta, epsilons=args.epsilon
        )
    elif args.spec:
        battery = spec_battery(
            ExperimentSpec.from_json_dict(load_json_object(Path(args.spec)))
        )
    else:
        battery = default_battery(eta=eta, seed=int(args.seed))
        if args.epsilon:
            battery = dataclasses.replace(battery, epsilons=tuple(args.epsilon))

    report = run_verify(
        battery,
        inject_fault=bool(args.inject_fault),
        oracle_pairs=int(args.oracle_pairs),
        seed=int(args.seed),
        round_trip_steps=int(args.round_trip_steps),
    )
    for line in report.lines():
        print(line)
    if args.out_dir:
        out = Path(args.out_dir) / VERIFY_FILE
        path = write_json_atomic(out, report.to_json_dict())
        _LOGGER.info("Wrote %s", path)
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_bounds(args: argparse.Namespace) -> int:
    """Handle the `bounds` subcommand."""
    model = load_model(Path(args.model))
    report = bounds_report(
        model, float(args.eta), float(args.epsilon), delta=args.delta
    )
    payload = report.to_json_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    path = write_json_atomic(resolve_out_dir(args.out_dir) / BOUNDS_FILE, payload)
    _LOGGER.info("Wrote %s", path)
    return EXIT_OK


# ---------------------------
# CLI
# ---------------------------


def build_parser() -> argparse.ArgumentParser:
    """Build the CLI argument parser.

    Returns:
        Configured `argparse.ArgumentParser`.
    """

    class _FullHelpAction(argparse.Action):
        """Print top-level help plus each subcommand's help."""

        def __call__(
            self,
            parser: argparse.ArgumentParser,
            namespace: argparse.Namespace,
            values: object,
            option_string: str | None = None,
        ) -> None:
            print(parser.format_help())

            subparsers: dict[str, argparse.ArgumentParser] = getattr(
                parser, "_subcommand_parsers", {}
            )
            for name, subparser in subparsers.items():
                print("\n\n" + ("=" * 80))
                print(f"{name} command")
                print(("=" * 80) + "\n")
                print(subparser.format_help())

            parser.exit()

    p = argparse.ArgumentParser(
        prog="emp",
        description="Entropy-regularized MAP inference by edge-based message passing",
        add_help=False,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument(
        "-h",
        "--help",
        action=_FullHelpAction,
        nargs=0,
        help="Show this help message and exit (includes subcommand help)",
    )
    p.add_argument(
        "-v", "--verbose", action="store_true", help="Enable verbose logging"
    )

    sub = p.add_subparsers(dest="cmd", required=True)

    solve = sub.add_parser("solve", help="Solve one model file")
    solve.add_argument("model", help="Model JSON file")
    solve.add_argument(
        "--eta", type=float, default=DEFAULT_ETA, help="Regularization strength"
    )
    solve.add_argument(
        "--epsilon", type=float, default=DEFAULT_EPSILON, help="l1 stopping threshold"
    )
    solve.add_argument(
        "--variant",
        choices=[str(v) for v in Variant],
        default=str(Variant.CYCLIC),
        help="Edge selection rule",
    )
    solve.add_argument(
        "--max-iterations",
        type=int,
        default=None,
        help="Sweep (cyclic) or step (greedy) cap (default: theory bound)",
    )
    solve.add_argument("--trace", action="store_true", help="Write trace.csv")
    solve.add_argument("--bounds", action="store_true", help="Write bounds.json")
    solve.add_argument(
        "--delta", type=float, default=None, help="Vertex gap for the bounds report"
    )
    solve.add_argument(
        "--assert-theory",
        action="store_true",
        help="Check the per-step guarantees while solving",
    )
    solve.add_argument(
        "--out-dir", default=None, help="Output directory (default: env or emp_out)"
    )
    solve.set_defaults(func=cmd_solve)

    experiment = sub.add_parser("experiment", help="Run a seeded experiment battery")
    experiment.add_argument("spec", help="Experiment spec JSON file")
    experiment.add_argument(
        "--workers",
        type=int,
        default=None,
        help=f"Worker threads (default: env {ENV_WORKERS} or {DEFAULT_WORKERS})",
    )
    experiment.add_argument(
        "--seed", type=int, default=None, help="Override the spec's base_seed"
    )
    experiment.add_argument(
        "--out-dir", default=None, help="Output directory (default: env or emp_out)"
    )
    experiment.set_defaults(func=cmd_experiment)

    verify = sub.add_parser("verify", help="Check the convergence theory")
    source = verify.add_mutually_exclusive_group()
    source.add_argument("--model", default=None, help="Verify on one model file")
    source.add_argument(
        "--spec", default=None, help="Verify on every instance of an experiment spec"
    )
    verify.add_argument(
        "--eta", type=float, default=DEFAULT_VERIFY_ETA, help="Regularization strength"
    )
    verify.add_argument(
        "--epsilon",
        type=float,
        action="append",
        default=None,
        help="Stopping threshold (repeatable; default: 0.1 and 0.01)",
    )
    verify.add_argument("--seed", type=int, default=0, help="Base seed")
    verify.add_argument(
        "--inject-fault",
        action="store_true",
        help="Test mode: flip the sign of the left consistency update",
    )
    verify.add_argument(
        "--oracle-pairs",
        type=int,
        default=DEFAULT_ORACLE_PAIRS,
        help="Random pairs for the oracle comparison",
    )
    verify.add_argument(
        "--round-trip-steps",
        type=int,
        default=ROUND_TRIP_STEPS,
        help="Random projections before the dual round trip",
    )
    verify.add_argument(
        "--out-dir", default=None, help="Also write verify.json here"
    )
    verify.set_defaults(func=cmd_verify)

    bounds = sub.add_parser("bounds", help="Print the theory constants of a model")
    bounds.add_argument("model", help="Model JSON file")
    bounds.add_argument(
        "--eta", type=float, default=DEFAULT_ETA, help="Regularization strength"
    )
    bounds.add_argument(
        "--epsilon", type=float, default=DEFAULT_EPSILON, help="l1 stopping threshold"
    )
    bounds.add_argument(
        "--delta", type=float, default=None, help="Vertex gap (default: enumerated)"
    )
    bounds.add_argument(
        "--out-dir", default=None, help="Output directory (default: env or emp_out)"
    )
    bounds.set_defaults(func=cmd_bounds)

    # Used by the custom top-level help action.
    setattr(
        p,
        "_subcommand_parsers",
        {"solve": solve, "experiment": experiment, "verify": verify, "bounds": bounds},
    )

    return p


def main(argv: Iterable[str] | None = None) -> int:
    """Entrypoint for the CLI.

    Args:
        argv: Optional argv list. If None, uses `sys.argv`.

    Returns:
        Exit code.
    """
    apply_dotenv_if_present()
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    setup_logging(bool(args.verbose))
    try:
        return int(args.func(args))
    except (EmpError, OSError, json.JSONDecodeError, ValueError) as err:
        _LOGGER.error("%s", err)
        _LOGGER.debug("Traceback", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
