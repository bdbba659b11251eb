# -*- coding: utf-8 -*-
"""
spinframe - スピノルから作る発散ゼロの枠場
Command-line entry point: spectra, framings, verification and exports.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional
import argparse
import logging
import sys
import time

import numpy as np
import pandas as pd
import scipy

from src import __version__
from src.business.dirac_service import DenseOracleLimitError, EigensolverConvergenceError
from src.cli.commands import COMMANDS, JobCommands
from src.cli.reporting import SummaryRenderer
from src.data.data_models import GridMismatchError, InvariantViolationError, SpinFrameError
from src.data.field_io import FieldIO, dumps_report
from src.utils.config import config
from src.utils.validators import ConfigValidationError, load_job_config


EXIT_SUCCESS = 0
EXIT_THRESHOLD = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, EigensolverConvergenceError):
        return EXIT_SOLVER
    if isinstance(error, (ConfigValidationError, InvariantViolationError, GridMismatchError, DenseOracleLimitError)):
        return EXIT_VALIDATION
    return EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog="spinframe",
        description="Dirac eigenspinors on flat and conformally flat 3-tori and the framings they induce."
    )
    parser.add_argument("command", choices=COMMANDS, help="Subcommand to run")
    parser.add_argument("--config", required=True, help="Path to the JSON job file")
    parser.add_argument("--out", default=None, help="Output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, default=None, help="Solver seed (overrides solver.seed)")
    parser.add_argument("--dense-oracle", action="store_true",
                        help="Force the dense cross-check; rejects grids above the dense limit")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parser


class SpinFrameApp:
    """Main spinframe application class."""

    def __init__(self, verbose: bool = False):
        """Initialize the spinframe application."""
        # Setup logging
        logging.basicConfig(
            level=logging.DEBUG if verbose else config.get_log_level(),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            stream=sys.stderr
        )
        self.logger = logging.getLogger(__name__)

        # Initialize services
        self.commands = JobCommands()
        self.renderer = SummaryRenderer()

        self.logger.debug(f"spinframe {__version__} initialized ({config.environment})")

    def run(self, args: argparse.Namespace) -> int:
        """
        Run one subcommand.

        Args:
            args: Parsed command-line arguments

        Returns:
            Process exit code
        """
        started = time.perf_counter()
        started_at = datetime.now(timezone.utc).isoformat()
        output_dir = Path(args.out) if args.out else config.output_dir
        try:
            job = load_job_config(args.config).with_overrides(
                seed=args.seed, out=args.out, dense_oracle=args.dense_oracle
            )
            output_dir = job.output.dir
            field_io = FieldIO(output_dir)

            result = self.commands.run(args.command, job, field_io)
            field_io.write_meta(
                f"{job.output.prefix}_{args.command}",
                self._metadata(args.command, started_at, started, result.passed)
            )
            print(self.renderer.render(result))
            if not result.passed:
                self.logger.warning(f"'{args.command}' finished with failed thresholds")
                return EXIT_THRESHOLD
            return EXIT_SUCCESS

        except SpinFrameError as e:
            self.logger.error(f"'{args.command}' failed: {str(e)}")
            return self._fail(e, output_dir)
        except Exception as e:
            self.logger.exception(f"Unexpected error in '{args.command}': {str(e)}")
            return self._fail(e, output_dir)

    def _metadata(self, command: str, started_at: str, started: float, passed: bool) -> Dict[str, Any]:
        return {
            'command': command,
            'started_at': started_at,
            'finished_at': datetime.now(timezone.utc).isoformat(),
            'wall_time_s': time.perf_counter() - started,
            'passed': passed,
            'environment': config.environment,
            'versions': {
                'spinframe': __version__,
                'numpy': np.__version__,
                'scipy': scipy.__version__,
                'pandas': pd.__version__,
                'python': sys.version.split()[0]
            }
        }

    def _fail(self, error: BaseException, output_dir: Path) -> int:
        code = exit_code_for(error)
        body: Dict[str, Any] = {
            'type': type(error).__name__,
            'message': str(error),
            'exit_code': code
        }
        if isinstance(error, ConfigValidationError):
            body['line'] = error.line
            body['key'] = error.key
        if isinstance(error, EigensolverConvergenceError):
            body['residuals'] = error.residuals
            body['iterations'] = error.iterations
        payload = {'error': body}

        print(dumps_report(payload), end="")
        try:
            FieldIO(output_dir).write_report('error', payload)
        except SpinFrameError as e:
            self.logger.error(f"Could not write error report: {str(e)}")
        return code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)
    app = SpinFrameApp(verbose=args.verbose)
    return app.run(args)


if __name__ == "__main__":
    raise SystemExit(main())
