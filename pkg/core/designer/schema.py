from typing import NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.model.schema import Constellation


class PairIndex(BaseModel):
    """Symbol pair (p, q), 1-based with p < q, and its linear index l"""
    model_config = ConfigDict(frozen=True)

    p: int = Field(..., ge=1)
    q: int = Field(..., ge=2)
    l: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "PairIndex":
        if self.p >= self.q:
            raise ValueError("pair must satisfy p < q")
        return self


class LinearizedDistance(NamedTuple):
    """Affine under-estimator h(c) = gradient @ c + offset of a squared pair distance"""
    gradient: np.ndarray
    offset: float

    def __call__(self, joint: np.ndarray) -> float:
        return float(self.gradient @ joint + self.offset)


class DesignResult(BaseModel):
    """Outcome of one SCA run, or the best of a multi-start batch"""
    model_config = ConfigDict(frozen=True)

    constellation: Constellation
    t_star: float
    iterations: int = Field(..., ge=0)
    start_index: int = Field(default=0, ge=0)
    feasible: bool = True
    t_history: Tuple[float, ...] = ()
    restart_meds: Tuple[float, ...] = Field(default=(), description="MED of every successful restart, in restart order")
    failed_restarts: int = Field(default=0, ge=0)

    @property
    def med(self) -> float:
        return self.constellation.med
