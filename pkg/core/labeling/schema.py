import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class PairwiseErrorMatrix(BaseModel):
    """P(i -> j) = Q(d_ij / sqrt(2 N0)) for every ordered symbol pair"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    prob: np.ndarray
    n0: float = Field(..., gt=0)

    @field_validator("prob", mode="before")
    @classmethod
    def _check_prob(cls, value) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("pairwise error matrix must be square")
        if not np.allclose(arr, arr.T) or np.any(np.diag(arr) != 0):
            raise ValueError("pairwise error matrix must be symmetric with zero diagonal")
        if np.any(arr < 0) or np.any(arr > 0.5):
            raise ValueError("pairwise error probabilities must lie in [0, 0.5]")
        return arr
