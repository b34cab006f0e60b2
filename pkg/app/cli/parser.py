import argparse

from app.cli.commands import bench, check, classify, gen, solve
from app.core.config import settings

COMMANDS = (solve, check, gen, bench, classify)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nashwelfare",
        description=settings.PROJECT_NAME,
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help=f"Logging level for stderr (default: {settings.LOG_LEVEL})",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser
