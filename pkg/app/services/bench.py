import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import IO, List, Optional, Tuple, Union

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import InstanceParseError, NashWelfareError, ParameterError
from app.schemas.result import BenchCase, BenchParams, BenchRow, BenchSuite
from app.schemas.welfare import WelfareValue
from app.services.fairness import wwef1_repair
from app.services.instance import load_instance
from app.services.oracle import brute_force_optimum
from app.services.solver import solve
from app.services.welfare import objective_welfare

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["instance", "method", "params", "welfare_log", "oracle_log", "ratio", "ms", "transfers"]


def load_suite(path: Union[str, Path]) -> BenchSuite:
    try:
        return BenchSuite.model_validate_json(Path(path).read_text())
    except ValidationError as e:
        raise InstanceParseError(f"invalid benchmark suite: {e.errors()[0]['msg']}", path="suite") from e


def _log_text(welfare: WelfareValue) -> str:
    return "zero" if welfare.is_zero else f"{welfare.log_value:.12g}"


def _ratio(welfare: WelfareValue, oracle: Optional[WelfareValue]) -> str:
    if oracle is None:
        return ""
    if oracle.is_zero:
        return "1" if welfare.is_zero else ""
    if welfare.is_zero:
        return "0"
    return f"{math.exp(welfare.log_value - oracle.log_value):.12g}"


def _parse_params(case: BenchCase) -> BenchParams:
    try:
        return BenchParams.model_validate(case.params)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "params"
        raise ParameterError(f"bad parameter {field}: {error['msg']}") from e


def run_case(case: BenchCase, method: str, base: Path) -> BenchRow:
    """One (instance, method) row; solver failures mark the row failed."""
    row = {"instance": case.instance, "method": method, "params": json.dumps(case.params, sort_keys=True)}
    try:
        params = _parse_params(case)
        p = params.p
        instance = load_instance(base / case.instance)
        started = time.perf_counter()
        solution = solve(
            instance, method, epsilon=params.epsilon, lambda_=params.lambda_, p=p
        )
        allocation, transfers = solution.allocation, ""
        if case.repair:
            repaired = wwef1_repair(instance, allocation)
            allocation, transfers = repaired.allocation, str(len(repaired.transfers))
        elapsed = (time.perf_counter() - started) * 1000
        welfare = objective_welfare(instance, allocation, p)
    except (NashWelfareError, OSError) as e:
        logger.error(f"Bench row {case.instance}/{method} failed: {e}")
        return BenchRow(**row, welfare_log="failed")

    try:
        oracle: Optional[WelfareValue] = brute_force_optimum(instance, p=p).best_welfare
    except NashWelfareError as e:
        logger.info(f"No oracle for {case.instance}: {e}")
        oracle = None
    return BenchRow(
        **row,
        welfare_log=_log_text(welfare),
        oracle_log=_log_text(oracle) if oracle is not None else "",
        ratio=_ratio(welfare, oracle),
        ms=f"{elapsed:.1f}",
        transfers=transfers,
    )


def run_suite(
    suite: BenchSuite, base: Union[str, Path] = ".", workers: Optional[int] = None
) -> List[BenchRow]:
    """Run every (case, method) pair; rows come back in suite order."""
    tasks: List[Tuple[BenchCase, str]] = [
        (case, method) for case in suite.cases for method in case.methods
    ]
    base = Path(base)
    with ThreadPoolExecutor(max_workers=workers or settings.BENCH_WORKERS) as pool:
        rows = list(pool.map(lambda task: run_case(task[0], task[1], base), tasks))
    logger.info(f"Benchmark finished: {len(rows)} rows")
    return rows


def write_csv(rows: List[BenchRow], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump())
