import logging
from pathlib import Path

from app.cli.common import budget_override, emit, format_p, parse_p
from app.schemas.result import SolveReport, WelfareReport
from app.services.fairness import wwef1_repair
from app.services.instance import load_instance, utilities
from app.services.solver import METHODS, solve
from app.services.welfare import objective_welfare, wwef1_violations

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Compute an allocation for an instance")
    parser.add_argument("instance", help="Instance JSON file")
    parser.add_argument("--method", default="auto", help=f"One of {', '.join(METHODS)}")
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--lambda", dest="lambda_", type=int, default=None)
    parser.add_argument("--p", default="0", help="Welfare exponent, e.g. 1, -1 or --p=-inf")
    parser.add_argument("--repair", action="store_true", help="Run wwEF1 repair on the result")
    parser.add_argument("--budget", type=int, default=None, help="Override enumeration budgets")
    parser.add_argument("--transfer-log", default=None, help="Write repair transfers as JSON lines")
    parser.add_argument("--out", default=None, help="Write the report here instead of stdout")
    parser.set_defaults(handler=run)


def _jsonable(parameters: dict) -> dict:
    return {key: format_p(value) if isinstance(value, float) else value for key, value in parameters.items()}


def run(args) -> int:
    instance = load_instance(args.instance)
    p = parse_p(args.p)
    with budget_override(args.budget):
        solution = solve(instance, args.method, epsilon=args.epsilon, lambda_=args.lambda_, p=p)

    report = SolveReport(
        method=solution.method,
        parameters=_jsonable(solution.parameters),
        allocation=solution.allocation,
        welfare=WelfareReport.of(solution.welfare),
        zero_welfare=solution.zero_welfare,
        utilities=[str(u) for u in utilities(instance, solution.allocation)],
        wwef1=False,
        violations=wwef1_violations(instance, solution.allocation),
        guarantee=solution.guarantee,
    )
    report.wwef1 = not report.violations

    if args.repair:
        repaired = wwef1_repair(instance, solution.allocation)
        report.repaired_allocation = repaired.allocation
        report.repaired_welfare = WelfareReport.of(objective_welfare(instance, repaired.allocation, p))
        report.transfers = list(repaired.transfers)
        report.violations = wwef1_violations(instance, repaired.allocation)
        report.wwef1 = not report.violations
        if args.transfer_log:
            lines = [t.model_dump_json(by_alias=True) for t in repaired.transfers]
            Path(args.transfer_log).write_text("".join(line + "\n" for line in lines))

    logger.info(f"Solved with {solution.method}: zero_welfare={solution.zero_welfare}")
    emit(report.model_dump_json(by_alias=True, indent=2), args.out)
    return 0
