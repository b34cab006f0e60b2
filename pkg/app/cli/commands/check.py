import json
from pathlib import Path
from typing import Optional

from app.cli.common import emit, format_p, parse_p
from app.schemas.result import CheckReport, WelfareReport
from app.services.instance import load_instance, parse_allocation, utilities, validate_allocation
from app.services.welfare import objective_welfare, wwef1_violations


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="Evaluate an allocation against an instance")
    parser.add_argument("instance", help="Instance JSON file")
    parser.add_argument("allocation", help="Allocation JSON file or a solve report")
    parser.add_argument(
        "--p",
        default=None,
        help="Welfare exponent; defaults to the p recorded in a solve report, else 0 (Nash)",
    )
    parser.add_argument("--out", default=None)
    parser.set_defaults(handler=run)


def _reported_p(text: str) -> Optional[float]:
    """The exponent a solve report was produced for, if the document is one."""
    document = json.loads(text)
    parameters = document.get("parameters") if isinstance(document, dict) else None
    if isinstance(parameters, dict) and parameters.get("p") is not None:
        return parse_p(str(parameters["p"]))
    return None


def run(args) -> int:
    instance = load_instance(args.instance)
    text = Path(args.allocation).read_text()
    allocation = parse_allocation(text)
    validate_allocation(instance, allocation)
    if args.p is not None:
        p = parse_p(args.p)
    else:
        p = _reported_p(text) or 0.0
    utils = utilities(instance, allocation)
    violations = wwef1_violations(instance, allocation)
    report = CheckReport(
        p=format_p(p),
        welfare=WelfareReport.of(objective_welfare(instance, allocation, p)),
        utilities=[str(u) for u in utils],
        entitlement_ratios=[str(u / w) for u, w in zip(utils, instance.weights)],
        wwef1=not violations,
        violations=violations,
    )
    emit(report.model_dump_json(indent=2), args.out)
    return 0
