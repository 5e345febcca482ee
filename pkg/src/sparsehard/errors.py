"""Shared exception types and resource-guard defaults."""

import os


class ParameterError(ValueError):
    """A construction parameter is out of its documented range."""


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class GadgetShapeError(ParameterError):
    """A codeword does not have the shape a gadget operation requires."""


class MalformedFormulaError(ParameterError):
    """A CNF formula violates the three-distinct-variables-per-clause rule."""


class IncompleteAssignmentError(ValueError):
    """An assignment does not label every vertex of the instance."""


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed the configured budget.

    Carries the required and allowed budgets so callers can report how much
    head-room the refused computation would need.
    """

    def __init__(self, required: int, allowed: int, what: str = "enumeration"):
        self.required = required
        self.allowed = allowed
        self.what = what
        super().__init__(
            f"{what} needs {required} steps, budget allows {allowed}"
        )


DEFAULT_DIMENSION_CAP = 1_000_000
DEFAULT_SUPPORT_CAP = 10_000_000
DEFAULT_ASSIGNMENT_CAP = 10_000_000


def memory_cap_bytes() -> int:
    """Dense-matrix memory ceiling, configurable via SPARSEHARD_CAP_MB."""
    mb = int(os.environ.get("SPARSEHARD_CAP_MB", "512"))
    return mb * 1024 * 1024
