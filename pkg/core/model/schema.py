import math
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.distance import pdist

COLOR_SUM_TOL = 1e-9
NONNEG_TOL = 1e-9
CLIP_TOL = 1e-8
MED_TOL = 1e-9

DomainTag = Literal["intensity", "pre-equalized"]

# Fracciones de color por perfil de iluminación
COLOR_PROFILES: dict[str, Tuple[float, float, float]] = {
    "balanced": (1 / 3, 1 / 3, 1 / 3),
    "unbalanced": (4 / 9, 3 / 9, 2 / 9),
    "extreme": (0.7, 0.15, 0.15),
}


class DesignSpec(BaseModel):
    """All inputs of a constellation design run"""
    model_config = ConfigDict(frozen=True)

    n_red: int = Field(default=1, ge=0, description="Number of red LEDs")
    n_green: int = Field(default=1, ge=0, description="Number of green LEDs")
    n_blue: int = Field(default=1, ge=0, description="Number of blue LEDs")
    n_symbols: int = Field(default=8, ge=2, description="Constellation size, a power of two")
    avg_power: float = Field(default=10.0, gt=0, description="Average optical power P_o")
    color_fractions: Tuple[float, float, float] = Field(default=COLOR_PROFILES["balanced"])
    papr_caps: Optional[Tuple[float, ...]] = Field(default=None, description="Per-LED PAPR caps, None = unconstrained")
    crosstalk_eps: float = Field(default=0.0, ge=0.0, lt=0.5)
    restarts: int = Field(default=30, ge=1)
    seed: int = Field(default=2024, ge=0, lt=2**64)
    sca_tol: float = Field(default=1e-7, gt=0)
    sca_max_iter: int = Field(default=200, ge=1)

    @field_validator("n_symbols")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"n_symbols must be a power of two, got {value}")
        return value

    @field_validator("color_fractions")
    @classmethod
    def _fractions_sum_to_one(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(f < 0 for f in value):
            raise ValueError("color fractions must be nonnegative")
        if abs(sum(value) - 1.0) > COLOR_SUM_TOL:
            raise ValueError(f"color fractions must sum to 1, got {sum(value)!r}")
        return value

    @model_validator(mode="after")
    def _check_leds(self) -> "DesignSpec":
        if self.n_leds < 1:
            raise ValueError("at least one LED is required")
        if self.papr_caps is not None:
            if len(self.papr_caps) != self.n_leds:
                raise ValueError(f"papr_caps needs {self.n_leds} entries, got {len(self.papr_caps)}")
            if any(a < 1 for a in self.papr_caps):
                raise ValueError("every PAPR cap must be >= 1")
        return self

    @property
    def n_leds(self) -> int:
        return self.n_red + self.n_green + self.n_blue

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.n_symbols))

    @property
    def led_counts(self) -> Tuple[int, int, int]:
        return (self.n_red, self.n_green, self.n_blue)

    @property
    def color_target(self) -> np.ndarray:
        """c_3 = P_o * fractions"""
        return self.avg_power * np.asarray(self.color_fractions, dtype=float)

    @property
    def color_slices(self) -> Tuple[slice, slice, slice]:
        """LED index ranges of each color inside a symbol vector, ordered [red, green, blue]"""
        r, g = self.n_red, self.n_red + self.n_green
        return (slice(0, r), slice(r, g), slice(g, self.n_leds))

    def with_papr(self, alpha: Optional[float]) -> "DesignSpec":
        """Copy with an identical PAPR cap on every LED (None removes the caps)"""
        caps = None if alpha is None else tuple([float(alpha)] * self.n_leds)
        return self.model_copy(update={"papr_caps": caps})


class Constellation(BaseModel):
    """Ordered symbol set; index = symbol id"""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    points: Tuple[Tuple[float, ...], ...]
    med: float = Field(..., ge=0)
    domain_tag: DomainTag = "intensity"

    @model_validator(mode="after")
    def _check_points(self) -> "Constellation":
        if not self.points:
            raise ValueError("constellation needs at least one point")
        if any(len(p) != self.dim for p in self.points):
            raise ValueError(f"every point must have dimension {self.dim}")
        if self.domain_tag == "intensity" and min(min(p) for p in self.points) < -NONNEG_TOL:
            raise ValueError("intensity constellation has a negative coordinate")
        true_med = float(pdist(np.asarray(self.points, dtype=float)).min()) if len(self.points) >= 2 else 0.0
        if abs(self.med - true_med) > MED_TOL * (1.0 + true_med):
            raise ValueError(f"med {self.med:.10g} differs from the minimum pairwise distance {true_med:.10g}")
        return self

    @classmethod
    def from_array(cls, points: np.ndarray, domain_tag: DomainTag = "intensity") -> "Constellation":
        """Builds a constellation from an (N_c, dim) array, computing its MED"""
        from core.model.services import minimum_euclidean_distance

        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if domain_tag == "intensity":
            # clip solver round-off below zero
            arr = np.where((arr < 0) & (arr >= -CLIP_TOL), 0.0, arr)
        med = minimum_euclidean_distance(arr) if len(arr) >= 2 else 0.0
        return cls(
            dim=arr.shape[1],
            points=tuple(tuple(float(v) for v in row) for row in arr),
            med=med,
            domain_tag=domain_tag,
        )

    @property
    def n_symbols(self) -> int:
        return len(self.points)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    @property
    def joint_vector(self) -> np.ndarray:
        """Stacked c_T = [c_1; ...; c_Nc]"""
        return self.array.reshape(-1)


class LabelingMap(BaseModel):
    """Bijection between N_B-bit words and symbol indices"""
    model_config = ConfigDict(frozen=True)

    bits_per_symbol: int = Field(..., ge=1)
    word_of_symbol: Tuple[int, ...]
    cost: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _check_bijection(self) -> "LabelingMap":
        n = 1 << self.bits_per_symbol
        if len(self.word_of_symbol) != n or sorted(self.word_of_symbol) != list(range(n)):
            raise ValueError(f"word_of_symbol must be a permutation of 0..{n - 1}")
        return self

    @classmethod
    def natural(cls, bits_per_symbol: int) -> "LabelingMap":
        return cls(bits_per_symbol=bits_per_symbol, word_of_symbol=tuple(range(1 << bits_per_symbol)))

    @property
    def n_symbols(self) -> int:
        return len(self.word_of_symbol)

    @property
    def words(self) -> np.ndarray:
        return np.asarray(self.word_of_symbol, dtype=np.int64)

    @property
    def symbol_of_word(self) -> np.ndarray:
        """Inverse map f^-1"""
        inverse = np.empty(self.n_symbols, dtype=np.int64)
        inverse[self.words] = np.arange(self.n_symbols)
        return inverse


class BerReport(BaseModel):
    """Per-OSNR Monte Carlo error counts"""
    model_config = ConfigDict(frozen=True)

    osnr_db: Tuple[float, ...]
    bits_per_symbol: int = Field(..., ge=1)
    n_bits: int = Field(..., ge=1, description="Bits simulated at every grid point")
    bit_errors: Tuple[int, ...]
    symbol_errors: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_counts(self) -> "BerReport":
        n = len(self.osnr_db)
        if len(self.bit_errors) != n or len(self.symbol_errors) != n:
            raise ValueError("one error count per OSNR point is required")
        for bits, symbols in zip(self.bit_errors, self.symbol_errors):
            if bits < 0 or bits > self.n_bits:
                raise ValueError("bit error count out of range")
            if bits > self.bits_per_symbol * symbols:
                raise ValueError("a symbol error flips at most bits_per_symbol bits")
        return self

    @property
    def n_symbols(self) -> int:
        return self.n_bits // self.bits_per_symbol

    @property
    def ber(self) -> list[float]:
        return [e / self.n_bits for e in self.bit_errors]

    @property
    def ser(self) -> list[float]:
        return [e / self.n_symbols for e in self.symbol_errors]

    @property
    def avg_bit_errors_per_symbol_error(self) -> list[float]:
        return [b / s if s else 0.0 for b, s in zip(self.bit_errors, self.symbol_errors)]

    def rows(self) -> list[tuple]:
        """Rows in the ber.csv column order"""
        return [
            (float(o), self.n_bits, b, float(ber), s, float(ser), float(avg))
            for o, b, ber, s, ser, avg in zip(
                self.osnr_db, self.bit_errors, self.ber, self.symbol_errors,
                self.ser, self.avg_bit_errors_per_symbol_error,
            )
        ]
