from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import get_settings
from core.model.schema import COLOR_PROFILES, DesignSpec
from core.utils import parse_float_list

settings = get_settings()

EqualizerChoice = Literal["none", "svd-pre", "zf", "lmmse"]
ProfileName = Literal["balanced", "unbalanced", "extreme"]
ReproduceTarget = Literal["table1", "table2", "table3", "fig2", "fig3", "fig4", "fig5", "fig6", "all"]


class RunConfig(BaseModel):
    """Flat run configuration; keys are the config file keys"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_red: int = Field(default=1, ge=0)
    n_green: int = Field(default=1, ge=0)
    n_blue: int = Field(default=1, ge=0)
    n_symbols: int = Field(default=8, ge=2)
    avg_power: float = Field(default=10.0, gt=0)
    profile: ProfileName = "balanced"
    color_fractions: Optional[Tuple[float, float, float]] = Field(
        default=None, description="Overrides profile when given"
    )
    papr_alpha: Optional[float] = Field(default=None, ge=1.0)
    crosstalk_eps: float = Field(default=0.0, ge=0.0, lt=0.5)
    restarts: int = Field(default_factory=lambda: settings.DEFAULT_RESTARTS, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=2**64)
    sca_tol: float = Field(default_factory=lambda: settings.SCA_TOL, gt=0)
    sca_max_iter: int = Field(default_factory=lambda: settings.SCA_MAX_ITER, ge=1)
    osnr_db_grid: Tuple[float, ...] = Field(default=(5.0,), min_length=1)
    n_bits: int = Field(default_factory=lambda: settings.DEFAULT_N_BITS, ge=1)
    equalizer: EqualizerChoice = "none"
    label_osnr_db: float = Field(default_factory=lambda: settings.LABEL_OSNR_DB)
    bsa_restarts: int = Field(default_factory=lambda: settings.BSA_RESTARTS, ge=1)
    noise_n_blue: int = Field(default=1, ge=1)
    hist_runs: int = Field(default_factory=lambda: settings.HIST_RUNS, ge=1)
    out_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    workers: int = Field(default_factory=lambda: settings.MAX_WORKERS, ge=1)

    @field_validator("color_fractions", mode="before")
    @classmethod
    def _fractions(cls, value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
            return None
        return tuple(parse_float_list(value, "color_fractions"))

    @field_validator("osnr_db_grid", mode="before")
    @classmethod
    def _grid(cls, value):
        if isinstance(value, (int, float)):
            return (float(value),)
        return tuple(parse_float_list(value, "osnr_db_grid"))

    @field_validator("papr_alpha", mode="before")
    @classmethod
    def _papr(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("", "none"):
            return None
        return value

    @model_validator(mode="after")
    def _bits_whole_symbols(self) -> "RunConfig":
        bits = self.n_symbols.bit_length() - 1
        if bits >= 1 and self.n_bits % bits:
            raise ValueError(f"n_bits={self.n_bits} must be a multiple of {bits} bits per symbol")
        return self

    @property
    def fractions(self) -> Tuple[float, float, float]:
        return self.color_fractions or COLOR_PROFILES[self.profile]

    @property
    def equalizer_kind(self) -> str:
        return "identity" if self.equalizer == "none" else self.equalizer

    def design_spec(self, **overrides) -> DesignSpec:
        """DesignSpec for this run; keyword overrides replace RunConfig values"""
        values = dict(
            n_red=self.n_red,
            n_green=self.n_green,
            n_blue=self.n_blue,
            n_symbols=self.n_symbols,
            avg_power=self.avg_power,
            color_fractions=self.fractions,
            crosstalk_eps=self.crosstalk_eps,
            restarts=self.restarts,
            seed=self.seed,
            sca_tol=self.sca_tol,
            sca_max_iter=self.sca_max_iter,
        )
        papr_alpha = overrides.pop("papr_alpha", self.papr_alpha)
        values.update(overrides)
        spec = DesignSpec(**values)
        return spec.with_papr(papr_alpha) if papr_alpha is not None else spec
