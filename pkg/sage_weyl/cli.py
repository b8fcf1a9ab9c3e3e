import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from sage_weyl.exceptions import NumericalError, SageWeylError
from sage_weyl.helpers.enums import Experiment
from sage_weyl.models.config import ExperimentConfig
from sage_weyl.services.runner import run_experiment
from sage_weyl.utils import write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
RUN_COMMAND = "run"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument(
        "--verbose", action="store_true", help="log debug detail to stderr"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sage-weyl",
        description="Boundary triple, Weyl function and Robin lower-bound experiments.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    _add_common(
        commands.add_parser(RUN_COMMAND, help="run the experiment named in the config")
    )
    for experiment in Experiment:
        _add_common(commands.add_parser(str(experiment), help=f"run {experiment}"))
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    changes: Dict[str, Any] = {}
    if args.command != RUN_COMMAND:
        changes["experiment"] = Experiment(args.command)
    if args.out is not None:
        changes["out"] = args.out
    if args.jobs is not None:
        changes["jobs"] = max(1, args.jobs)
    if args.seed is not None:
        changes["seed"] = args.seed
    return changes


def _report_failure(error: SageWeylError, out: Path) -> int:
    logger.error("%s", error)
    try:
        write_json(out / "error.json", error.to_dict())
    except OSError as exc:
        logger.error("Could not write the error report: %s", exc)
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``sage-weyl`` command.

    Returns
    -------
    int
        0 on success, 2 for configuration errors, 3 for numerical failures.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    out = args.out if args.out is not None else Path("out")
    try:
        config = ExperimentConfig.from_file(args.config)
        config = dataclasses.replace(config, **_overrides(args))
        out = config.out
        run_experiment(config)
    except SageWeylError as exc:
        return _report_failure(exc, out)
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        return _report_failure(NumericalError(str(exc)), out)
    logger.info("Results written to %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
