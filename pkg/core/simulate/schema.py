from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.channel.schema import ChannelModel, EqualizerKind
from core.channel.services import crosstalk_channel


class SimConfig(BaseModel):
    """Monte Carlo run parameters"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    osnr_db_grid: Tuple[float, ...] = Field(..., min_length=1)
    n_bits: int = Field(default=300000, ge=1, description="Bits per grid point; a multiple of N_B")
    seed: int = Field(default=2024, ge=0, lt=2**64)
    equalizer_kind: EqualizerKind = "identity"
    channel: ChannelModel = Field(default_factory=lambda: crosstalk_channel(0.0))
    noise_n_blue: int = Field(default=1, ge=1, description="N_b in the OSNR definition")

    @field_validator("osnr_db_grid", mode="before")
    @classmethod
    def _grid(cls, value) -> Tuple[float, ...]:
        if isinstance(value, (int, float)):
            return (float(value),)
        return tuple(float(v) for v in value)
