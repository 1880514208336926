"""
Main CLI Application
Entry point for the octant variational problem solver
"""

import argparse
import json
import logging
import sys
from typing import List, NoReturn, Optional

from app.commands import COMMANDS
from app.core.config import settings
from app.core.exceptions import OctantVPError, UsageError

logger = logging.getLogger("app")


# ==========================================
# CREATE PARSER
# ==========================================

class CliParser(argparse.ArgumentParser):
    """Argument errors raise UsageError (exit 1); exit 2 means Inconclusive"""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="octant-vp",
        description=f"{settings.APP_NAME} v{settings.APP_VERSION}: large deviations of RBM in the octant"
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--version", action="version", version=settings.APP_VERSION)

    # ==========================================
    # COMMANDS
    # ==========================================

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)
    for command in COMMANDS:
        sub = command.add_parser(subparsers)
        sub.set_defaults(handler=command.run)
    return parser


# ==========================================
# LOGGING
# ==========================================

def configure_logging(level: str) -> None:
    """Root logger to stderr so stdout carries only reports"""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise UsageError(f"unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True
    )


# ==========================================
# EXCEPTION HANDLER
# ==========================================

def handle_error(exc: OctantVPError, as_json: bool) -> int:
    """Global handler: message on stderr, exit code from the exception"""
    if as_json:
        sys.stderr.write(json.dumps(exc.to_dict(), indent=2, default=str) + "\n")
    else:
        sys.stderr.write(f"error: {exc.message}\n")
        if settings.DEBUG and exc.details:
            sys.stderr.write(json.dumps(exc.details, indent=2, default=str) + "\n")
    return exc.exit_code


# ==========================================
# MAIN
# ==========================================

def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        logger.info("running %s", args.command)
        return args.handler(args)
    except OctantVPError as exc:
        return handle_error(exc, as_json)
    except Exception as exc:
        logger.exception("unexpected failure")
        sys.stderr.write(f"error: {exc if settings.DEBUG else 'internal error'}\n")
        return 1


# ==========================================
# DEVELOPMENT
# ==========================================

if __name__ == "__main__":
    sys.exit(main())
