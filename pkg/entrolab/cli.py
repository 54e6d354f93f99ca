"""Batch command-line interface for entrolab."""

import argparse
import sys
from pathlib import Path
from typing import Optional, TextIO

from entrolab import __version__
from entrolab.config import ConfigManager, EntrolabConfig
from entrolab.errors import (
    AmbientMismatch,
    OrderBoundExceeded,
    ProblemFormatError,
    TruncationTooLarge,
    UnsupportedBandPattern,
)
from entrolab.logger import ComputationLogger
from entrolab.problem import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, canonical_json, load_problem, run_problem
from entrolab.selftest import SUITES, run_suites

INPUT_ERRORS = (
    ProblemFormatError,
    ValueError,
    AmbientMismatch,
    OrderBoundExceeded,
    TruncationTooLarge,
    UnsupportedBandPattern,
)


class CLIInterface:
    """Command-line front-end: runs problem files and self-tests."""

    def __init__(
        self,
        config_manager: ConfigManager,
        logger: Optional[ComputationLogger] = None,
        out: Optional[TextIO] = None,
    ):
        """Initialize CLI with dependencies.

        Args:
            config_manager: Configuration manager instance
            logger: Optional logger instance
            out: Stream receiving JSON results (defaults to stdout)
        """
        self.config_manager = config_manager
        self.logger = logger
        self.out = out
        self._config: Optional[EntrolabConfig] = None

    @property
    def config(self) -> EntrolabConfig:
        """Get current configuration, loading if needed."""
        if self._config is None:
            self._config = self.config_manager.load()
        return self._config

    def _emit(self, payload: dict) -> None:
        print(canonical_json(payload), file=self.out or sys.stdout)

    def run_file(self, path: Path, trace: bool = False, jobs: Optional[int] = None) -> int:
        """Solve one problem file and print the JSON result.

        Returns:
            Process exit code
        """
        if self.logger:
            self.logger.log_task("run", str(path))
        try:
            problem = load_problem(path, self.config.budget())
            code, payload = run_problem(problem, trace, jobs or self.config.jobs)
        except OSError as e:
            return self._input_error(f"cannot read {path}: {e}")
        except INPUT_ERRORS as e:
            return self._input_error(f"{type(e).__name__}: {e}")
        self._emit(payload)
        if self.logger:
            self.logger.log_result(problem.task, f"exit code {code}")
        return code

    def _input_error(self, message: str) -> int:
        if self.logger:
            self.logger.log_error(message)
        self._emit({"error": {"kind": "InputError", "message": message}})
        return EXIT_INPUT

    def selftest(self, suites: Optional[list[str]] = None, exhaustive: bool = False) -> int:
        """Run invariant suites and print pass/fail counts.

        Returns:
            0 if every check passed, 1 otherwise
        """
        if self.logger:
            self.logger.log_task("selftest", ", ".join(suites or SUITES))
        reports = run_suites(suites, exhaustive)
        ok = all(r.ok for r in reports)
        self._emit({"ok": ok, "suites": {r.name: r.to_json() for r in reports}})
        return EXIT_OK if ok else EXIT_MISMATCH

    def version(self) -> int:
        print(f"entrolab {__version__}", file=self.out or sys.stdout)
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrolab",
        description="Exact adjoint, algebraic and topological entropy of group endomorphisms.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="configuration file (default ~/.entrolab_config.json)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="solve a JSON problem file")
    run.add_argument("file", type=Path)
    run.add_argument("--trace", action="store_true", help="include the cotrajectory trace")
    run.add_argument("--jobs", type=int, default=None, help="threads for independent base members")

    selftest = commands.add_parser("selftest", parents=[common], help="run the invariant suites")
    selftest.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only this suite (repeatable)")
    selftest.add_argument("--exhaustive", action="store_true", help="run the full-size suites")

    commands.add_parser("version", parents=[common], help="print the version")
    return parser


def main(argv: Optional[list[str]] = None) -> None:
    """CLI entry point for entrolab.

    This function is called when running via the 'entrolab' command
    installed by the package.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")

    # Initialize configuration manager
    config_manager = ConfigManager(args.config)

    # Load configuration
    config = config_manager.load()

    # Initialize logger: log file plus diagnostics on stderr
    logger = ComputationLogger.for_cli(config.log_file_path, config.log_level)

    cli = CLIInterface(config_manager, logger)
    try:
        if args.command == "run":
            code = cli.run_file(args.file, args.trace, args.jobs)
        elif args.command == "selftest":
            code = cli.selftest(args.suite, args.exhaustive)
        else:
            code = cli.version()
    finally:
        logger.close()
    sys.exit(code)
