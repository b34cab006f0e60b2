import math
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Union

from app.core.config import settings
from app.core.errors import ParameterError


def parse_p(text: str) -> float:
    """Welfare exponent; accepts "-inf"."""
    try:
        value = float(text)
    except ValueError:
        raise ParameterError(f"p must be a number or -inf, got {text!r}")
    if math.isnan(value) or value == math.inf:
        raise ParameterError(f"p must be finite or -inf, got {text!r}")
    return value


def format_p(p: float) -> Union[float, str]:
    """JSON-safe exponent; -inf is written as a string."""
    return str(p) if math.isinf(p) else p


def emit(text: str, out: Optional[str] = None) -> None:
    """Print to stdout, or write to a file when --out is given."""
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


@contextmanager
def budget_override(budget: Optional[int]) -> Iterator[None]:
    """Temporarily replace the solver and oracle budgets."""
    if budget is None:
        yield
        return
    saved = settings.SOLVER_BUDGET, settings.ORACLE_MAX_ALLOCATIONS
    settings.SOLVER_BUDGET = budget
    settings.ORACLE_MAX_ALLOCATIONS = budget
    try:
        yield
    finally:
        settings.SOLVER_BUDGET, settings.ORACLE_MAX_ALLOCATIONS = saved
