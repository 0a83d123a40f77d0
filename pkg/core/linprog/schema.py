from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

LpStatus = Literal["optimal", "infeasible", "unbounded", "iteration-limit"]


def _as_matrix(value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    return arr.reshape(0, 0) if arr.size == 0 and arr.ndim < 2 else np.atleast_2d(arr)


class LpProblem(BaseModel):
    """
    maximize objective @ x
    s.t. eq_lhs @ x == eq_rhs, ub_lhs @ x <= ub_rhs, x >= lower_bounds

    A lower bound of -inf marks a free variable.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    objective: np.ndarray
    eq_lhs: Optional[np.ndarray] = None
    eq_rhs: Optional[np.ndarray] = None
    ub_lhs: Optional[np.ndarray] = None
    ub_rhs: Optional[np.ndarray] = None
    lower_bounds: Optional[np.ndarray] = Field(default=None, description="Defaults to 0 for every variable")

    @field_validator("objective", "eq_rhs", "ub_rhs", "lower_bounds", mode="before")
    @classmethod
    def _vector(cls, value):
        if value is None:
            return None
        return np.asarray(value, dtype=float).reshape(-1)

    @field_validator("eq_lhs", "ub_lhs", mode="before")
    @classmethod
    def _matrix(cls, value):
        if value is None:
            return None
        return _as_matrix(value)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    def equalities(self) -> tuple[np.ndarray, np.ndarray]:
        if self.eq_lhs is None or self.eq_lhs.size == 0:
            return np.zeros((0, self.n_vars)), np.zeros(0)
        return self.eq_lhs, self.eq_rhs

    def inequalities(self) -> tuple[np.ndarray, np.ndarray]:
        if self.ub_lhs is None or self.ub_lhs.size == 0:
            return np.zeros((0, self.n_vars)), np.zeros(0)
        return self.ub_lhs, self.ub_rhs

    def bounds(self) -> np.ndarray:
        if self.lower_bounds is None:
            return np.zeros(self.n_vars)
        return self.lower_bounds


class LpSolution(BaseModel):
    """Simplex outcome"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    status: LpStatus
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"
