"""Exceptions raised by the solver services.

Every exception carries the process exit code the CLI reports for it.
"""


class NashWelfareError(Exception):
    """Base class for all solver errors."""
    exit_code = 1


class InstanceParseError(NashWelfareError):
    """Exception raised when an instance or allocation document is malformed."""
    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class InvalidAllocationError(NashWelfareError):
    """Exception raised for overlapping, out-of-range or mis-sized bundles."""
    exit_code = 2


class ParameterError(NashWelfareError):
    """Exception raised for solver parameters outside their valid range."""
    exit_code = 2


class BudgetExceededError(NashWelfareError):
    """Exception raised when an enumeration would exceed its budget."""
    exit_code = 3

    def __init__(self, what: str, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what} requires a budget of {required} but the budget is {budget}"
        )


class UnsupportedProfileError(NashWelfareError):
    """Exception raised when a method cannot handle the instance's profile."""
    exit_code = 4


class InternalInvariantError(NashWelfareError):
    """Exception raised when an algorithm invariant is found violated."""
    exit_code = 1
