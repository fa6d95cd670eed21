"""Exception types shared across the package."""
from __future__ import annotations


class KhoError(Exception):
    """Base class for numerical failures."""


class GridMismatchError(KhoError, ValueError):
    pass


class GridOverflowError(KhoError):
    """Probability reached the grid edges; results would be aliased."""

    def __init__(self, message: str, where: str = "", step: int | None = None,
                 axis: str = "position"):
        self.where = where
        self.step = step
        self.axis = axis
        prefix = where or "grid"
        if step is not None:
            prefix += f" (step {step})"
        super().__init__(f"{prefix}: {message}")


class TruncationError(KhoError):
    """Number-basis population reached the truncation edge."""


class PointBudgetExceeded(KhoError):
    """Manifold refinement needed more points than allowed."""
