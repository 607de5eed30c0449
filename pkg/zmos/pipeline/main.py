"""
Command-line entry point.
"""


import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from pathlib import Path
from typing import List

from loguru import logger

from ..config import ConfigError
from ..dsp import load_waveform, save_waveform
from ..enhancement import (
    ComponentEnsemble,
    enhance,
    load_routing_qnet,
    resolve_ensemble_dir,
)
from ..errors import ZmosError
from ..logger import config_logger
from ..quality import QualityNet
from ..selection import Strategy
from .experiment import ensure_writable_root, load_experiment_config
from .markers import MissingPrerequisiteError, StaleInputError
from .schemas import ExperimentConfig, Stage
from .stages import run_all, run_stage

ALL_STAGES = "all"

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_MISSING_PREREQUISITE = 3
EXIT_FAILURE = 4


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise ArgumentTypeError(f"Expected a positive integer, got {value}.")
    return number


def _load_config(cli_args: Namespace) -> ExperimentConfig:
    """
    Loads the experiment file and applies command-line overrides.

    Args:
        cli_args: The parsed CLI arguments.

    Returns:
        The configuration.

    """
    config = load_experiment_config(cli_args.config)
    if cli_args.jobs is not None:
        runtime = config.runtime.copy(update=dict(jobs=cli_args.jobs))
        config = config.copy(update=dict(runtime=runtime))
    return config


def _run_stage(cli_args: Namespace) -> None:
    """
    Target for the stage commands.

    Args:
        cli_args: The parsed CLI arguments.

    """
    config = _load_config(cli_args)
    root = ensure_writable_root(config)
    config_logger(cli_args.stage, root / "logs")
    if cli_args.stage == ALL_STAGES:
        run_all(config, force=cli_args.force)
    else:
        run_stage(Stage(cli_args.stage), config, force=cli_args.force)


def _enhance_file(cli_args: Namespace) -> None:
    """
    Target for the "enhance-file" command.

    Args:
        cli_args: The parsed CLI arguments.

    """
    strategy = Strategy(cli_args.strategy)
    directory = resolve_ensemble_dir(cli_args.ensemble, strategy)
    ensemble = ComponentEnsemble.load(directory)
    if cli_args.qnet is not None:
        qnet = QualityNet.load(cli_args.qnet)
    else:
        qnet = load_routing_qnet(directory)

    noisy = load_waveform(cli_args.input)
    enhanced, chosen, diagnostics = enhance(noisy, ensemble, qnet, strategy)
    save_waveform(enhanced, cli_args.output)
    logger.info("Wrote {}.", cli_args.output)

    print(chosen)
    if cli_args.diagnostics:
        print(diagnostics.json(indent=2))


def _make_parser() -> ArgumentParser:
    """
    Creates a parser to use for command-line arguments.

    Returns:
        The parser that it created.

    """
    parser = ArgumentParser(
        description="Zero-shot model selection for speech enhancement."
    )
    subparsers = parser.add_subparsers(
        title="command", dest="command", required=True
    )

    stage_names = [s.value for s in Stage] + [ALL_STAGES]
    for stage_name in stage_names:
        stage_parser = subparsers.add_parser(
            stage_name,
            help="Run every stage in order."
            if stage_name == ALL_STAGES
            else f"Run the {stage_name} stage.",
        )
        stage_parser.add_argument(
            "--config",
            type=Path,
            required=True,
            help="The JSON experiment file.",
        )
        stage_parser.add_argument(
            "--force",
            action="store_true",
            help="Run even if the output is up to date.",
        )
        stage_parser.add_argument(
            "--jobs",
            type=_positive_int,
            help="Maximum number of parallel worker processes.",
        )
        stage_parser.set_defaults(func=_run_stage, stage=stage_name)

    enhance_parser = subparsers.add_parser(
        "enhance-file", help="Enhance a single WAV file."
    )
    enhance_parser.add_argument(
        "--input", type=Path, required=True, help="The noisy WAV file."
    )
    enhance_parser.add_argument(
        "--ensemble",
        type=Path,
        required=True,
        help="An ensemble directory, or the train-se stage directory.",
    )
    enhance_parser.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        required=True,
        help="How to route the utterance.",
    )
    enhance_parser.add_argument(
        "--output", type=Path, required=True, help="Where to write the result."
    )
    enhance_parser.add_argument(
        "--qnet",
        type=Path,
        help="Quality predictor checkpoint. Defaults to the one recorded in"
        " the ensemble.",
    )
    enhance_parser.add_argument(
        "--diagnostics",
        action="store_true",
        help="Print the routing diagnostics as JSON.",
    )
    enhance_parser.set_defaults(func=_enhance_file)

    return parser


def run(argv: List[str] | None = None) -> int:
    """
    Runs a command.

    Args:
        argv: The command-line arguments. Defaults to `sys.argv`.

    Returns:
        The exit status.

    """
    config_logger("zmos")
    args = _make_parser().parse_args(argv)

    try:
        args.func(args)
    except ConfigError as err:
        logger.error("{}", err)
        return EXIT_CONFIG_ERROR
    except (MissingPrerequisiteError, StaleInputError) as err:
        logger.error("{}", err)
        return EXIT_MISSING_PREREQUISITE
    except ZmosError as err:
        logger.error("{}", err)
        return EXIT_FAILURE
    except Exception:
        logger.exception("Unexpected failure.")
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
