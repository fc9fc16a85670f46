#!/usr/bin/env python3
import argparse
import logging
import sys

from pydantic import ValidationError

from qsearch.config import get_config_file, load_config, read_config_file, save_config
from qsearch.errors import UsageError, WitnessDisagreementError
from qsearch.experiment import ALGORITHMS, ExperimentConfig, run_experiment
from qsearch.report import FORMATS, emit_report

log_format = "%(asctime)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"

EXIT_PASS = 0
EXIT_CLAIM_FAILED = 1
EXIT_USAGE = 2
EXIT_WITNESS_DISAGREEMENT = 3

# argparse dest -> ExperimentConfig field
FLAG_FIELDS = {
    "algorithm": "algorithm",
    "n": "n",
    "n_max": "n_max",
    "answer": "answer",
    "answer_value": "answer_value",
    "seed": "seed",
    "trials": "trials",
    "iterations": "iterations",
    "detuning_exponent": "detuning_exponent",
    "format": "format",
    "out": "out",
}

# argparse dest that --save-defaults stores in the user defaults file
DEFAULT_KEYS = ("seed", "detuning_exponent", "tol_purity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate search circuits and check their query and entanglement claims."
    )
    parser.add_argument("--algorithm", choices=ALGORITHMS, type=str.lower)
    parser.add_argument("--n", type=int, help="Number of guess qubits (first n of a sweep)")
    parser.add_argument("--n-max", type=int, help="Sweep n up to and including this value")
    parser.add_argument("--answer", choices=["random", "fixed", "exhaustive"],
                        help="How the hidden answer a is chosen (default: random)")
    parser.add_argument("--answer-value", type=int, help="The answer a for --answer fixed")
    parser.add_argument("--seed", type=int, help="Seed for answers and random local gates")
    parser.add_argument("--trials", type=int, help="Random answers drawn per n")
    parser.add_argument("--iterations", type=int, help="Override the Grover iteration count")
    parser.add_argument("--detuning-exponent", type=float,
                        help="Level spacing shrinks as N^-p; this sets p (default 3)")
    parser.add_argument("--tol-purity", type=float, help="Purity tolerance for product verdicts")
    parser.add_argument("--format", choices=FORMATS, type=str.lower)
    parser.add_argument("--out", help="Write the report here instead of stdout")
    parser.add_argument("--claims-only", action="store_true", default=None,
                        help="Emit only metadata and claim verdicts")
    parser.add_argument(
        "--config",
        help="JSON or YAML experiment config; flags override it. "
             f"User defaults are read from {get_config_file()}",
    )
    parser.add_argument(
        "--save-defaults", action="store_true",
        help="Store --seed, --detuning-exponent and --tol-purity as user defaults; "
             "without --algorithm or --config nothing is run",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parser


def save_defaults(args: argparse.Namespace) -> dict:
    """Merge the seed, detuning exponent and purity tolerance flags into the defaults file."""
    if args.detuning_exponent is not None and args.detuning_exponent <= 0:
        raise UsageError(f"Detuning exponent must be positive, got {args.detuning_exponent}")
    if args.tol_purity is not None and not 0 < args.tol_purity < 1:
        raise UsageError(f"Purity tolerance must lie in (0, 1), got {args.tol_purity}")
    new_config = read_config_file().copy()
    for key in DEFAULT_KEYS:
        value = getattr(args, key)
        if value is not None:
            new_config[key] = value
    save_config(new_config)
    logging.info(f"Saved user defaults to {get_config_file()}")
    return new_config


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Flags > --config file > user defaults > model defaults."""
    settings = {}
    defaults = load_config()
    for key in ("seed", "detuning_exponent"):
        if key in defaults:
            settings[key] = defaults[key]
    if "tol_purity" in defaults:
        settings["tolerances"] = {"purity": defaults["tol_purity"]}

    if args.config:
        file_settings = ExperimentConfig.read_file(args.config)
        tolerances = {**settings.get("tolerances", {}), **file_settings.pop("tolerances", {})}
        settings.update(file_settings)
        if tolerances:
            settings["tolerances"] = tolerances

    for dest, key in FLAG_FIELDS.items():
        value = getattr(args, dest)
        if value is not None:
            settings[key] = value
    if args.claims_only:
        settings["claims_only"] = True
    if args.tol_purity is not None:
        settings["tolerances"] = {**settings.get("tolerances", {}), "purity": args.tol_purity}

    if "algorithm" not in settings or "n" not in settings:
        raise UsageError("--algorithm and --n are required (on the command line or in --config)")
    return ExperimentConfig.model_validate(settings)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.getLogger().level
    logging.basicConfig(level=level, format=log_format, force=True)

    if args.save_defaults:
        try:
            save_defaults(args)
        except (UsageError, OSError) as e:
            logging.error(f"Could not save defaults: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        if args.algorithm is None and args.config is None:
            return EXIT_PASS

    try:
        config = resolve_config(args)
    except (UsageError, ValidationError, ValueError, OSError) as e:
        logging.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = run_experiment(config)
        text = emit_report(result, config.format, config.out)
    except WitnessDisagreementError as e:
        logging.error(f"Internal witness disagreement: {e}")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_WITNESS_DISAGREEMENT
    except (UsageError, OSError) as e:
        logging.error(f"{e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if config.out is None:
        sys.stdout.write(text)

    failed = [claim.claim_id for claim in result.claims if claim.verdict == "fail"]
    if failed:
        logging.warning(f"Failed claims: {', '.join(failed)}")
        return EXIT_CLAIM_FAILED
    logging.info(f"All {len(result.claims)} claims pass")
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
