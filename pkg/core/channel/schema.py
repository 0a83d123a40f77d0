from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

EqualizerKind = Literal["identity", "svd-pre", "zf", "lmmse"]


class ChannelModel(BaseModel):
    """Cross-talk matrix H (received = H @ transmitted + noise)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    eps: Optional[float] = Field(default=None, description="Generating epsilon of the canonical model")

    @field_validator("matrix", mode="before")
    @classmethod
    def _square(cls, value) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"channel matrix must be square, got shape {arr.shape}")
        return arr

    @property
    def n_leds(self) -> int:
        return self.matrix.shape[0]


class EqualizerSet(BaseModel):
    """Transmit/receive linear processing around the channel"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: EqualizerKind
    pre: Optional[np.ndarray] = None
    post: Optional[np.ndarray] = None
    rank: int = Field(..., ge=1)
    n0: Optional[float] = Field(default=None, description="Noise level an LMMSE post was built for")

    def post_matrix(self, n_out: int) -> np.ndarray:
        """Receive matrix, identity when absent"""
        return np.eye(n_out) if self.post is None else self.post
