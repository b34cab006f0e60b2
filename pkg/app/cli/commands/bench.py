import io
from pathlib import Path

from app.cli.common import budget_override, emit
from app.services.bench import load_suite, run_suite, write_csv


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="Run a benchmark suite and print CSV")
    parser.add_argument("suite", help="Suite JSON file; instance paths are relative to it")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.set_defaults(handler=run)


def run(args) -> int:
    suite = load_suite(args.suite)
    with budget_override(args.budget):
        rows = run_suite(suite, base=Path(args.suite).parent, workers=args.workers)
    buffer = io.StringIO()
    write_csv(rows, buffer)
    emit(buffer.getvalue().rstrip("\n"), args.out)
    return 0
