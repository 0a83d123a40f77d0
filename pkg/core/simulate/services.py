"""
Seeded Monte Carlo BER simulation.

Every OSNR grid point g draws from its own Philox sub-stream (seed, g), so
error counts do not depend on thread scheduling. Noise is white Gaussian
with per-dimension variance N0/2, and N0 follows from the optical SNR
gamma_o = 10 log10(P_o / sqrt(N_b N0)).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from core.channel.schema import EqualizerSet
from core.channel.services import lmmse_equalizer
from core.errors import CskError, DomainViolationError, InvalidDomainError, InvalidInputError
from core.model.schema import BerReport, Constellation, DesignSpec, LabelingMap
from core.rng import make_generator, standard_normal
from core.simulate.schema import SimConfig

logger = logging.getLogger(__name__)

NEGATIVE_INTENSITY_TOL = 1e-9


def noise_param_from_osnr(osnr_db: float, avg_power: float, n_blue: int = 1) -> float:
    """
    Inverts the optical SNR definition: N0 = P_o^2 / (N_b * 10^(osnr_db / 5)).

    Args:
        osnr_db: Optical SNR in dB
        avg_power: Average optical power P_o
        n_blue: N_b of the OSNR definition

    Returns:
        Noise parameter N0
    """
    if avg_power <= 0 or n_blue < 1:
        raise InvalidInputError("OSNR conversion needs P_o > 0 and N_b >= 1")
    return float(avg_power ** 2 / (n_blue * 10.0 ** (osnr_db / 5.0)))


def detect_nearest(received: Sequence[float] | np.ndarray, candidates: Sequence[Sequence[float]] | np.ndarray) -> int:
    """
    Minimum-distance detection; ties go to the lowest index.

    Raises:
        InvalidInputError: If there are no candidates or dimensions differ
    """
    cand = np.asarray(candidates, dtype=float)
    if cand.size == 0:
        raise InvalidInputError("No candidate symbols to detect against")
    y = np.asarray(received, dtype=float)
    if cand.ndim != 2 or cand.shape[1] != y.shape[-1]:
        raise InvalidInputError("Received vector and candidates differ in dimension")
    return int(detect_nearest_batch(y[None, :], cand)[0])


def detect_nearest_batch(received: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Row-wise minimum-distance detection of an (n, dim) block."""
    d2 = np.sum((received[:, None, :] - candidates[None, :, :]) ** 2, axis=-1)
    return np.argmin(d2, axis=1)


def _popcount_table(bits_per_symbol: int) -> np.ndarray:
    return np.array([bin(w).count("1") for w in range(1 << bits_per_symbol)], dtype=np.int64)


class SimulationService:
    """
    Runs BER simulations for designed and conventional systems.
    """

    def __init__(self, max_workers: int = 1, chunk_symbols: int = 65536):
        self.max_workers = max(1, max_workers)
        self.chunk_symbols = max(1, chunk_symbols)

    def run_ber(
        self,
        constellation: Constellation,
        labeling: LabelingMap,
        equalizers: EqualizerSet,
        sim: SimConfig,
        spec: DesignSpec,
        intensity_tol: float | None = None,
    ) -> BerReport:
        """
        Simulates a labeled constellation through channel and equalizers.

        Per grid point: derive N0, draw uniform words, map them to symbols, transmit
        (P c for svd-pre), add noise after the channel, apply the post matrix, detect
        against the kind's candidate images, de-map and count errors. An LMMSE post is
        re-derived at each grid point's N0.

        Args:
            constellation: Intensity points, or design-space points for svd-pre
            labeling: Bit-to-symbol map
            equalizers: Equalizer set matching ``sim.equalizer_kind``
            sim: Monte Carlo configuration
            spec: Design spec (provides P_o)
            intensity_tol: Largest accepted negative transmitted intensity, in
                absolute units; defaults to NEGATIVE_INTENSITY_TOL

        Returns:
            BerReport over sim.osnr_db_grid

        Raises:
            DomainViolationError: If a transmitted intensity is negative
            InvalidInputError: If sizes are inconsistent
        """
        try:
            self._check_inputs(constellation, labeling, equalizers, sim)
            points = constellation.array
            h = sim.channel.matrix
            if equalizers.kind == "svd-pre":
                tx_points = points @ equalizers.pre.T
            else:
                tx_points = points
            floor = -NEGATIVE_INTENSITY_TOL if intensity_tol is None else -intensity_tol
            if tx_points.min() < floor:
                raise DomainViolationError(
                    f"Transmitted intensity {tx_points.min():.6g} is negative; "
                    f"constellation and equalizer do not match"
                )
            tx_points = np.maximum(tx_points, 0.0)
            if tx_points.shape[1] != h.shape[1]:
                raise InvalidInputError(
                    f"Transmitted dimension {tx_points.shape[1]} does not match a {h.shape[0]}x{h.shape[1]} channel"
                )

            n_symbols = sim.n_bits // labeling.bits_per_symbol

            def run_point(g: int) -> tuple[int, int]:
                osnr = sim.osnr_db_grid[g]
                n0 = noise_param_from_osnr(osnr, spec.avg_power, sim.noise_n_blue)
                post, candidates = self._receiver(equalizers, constellation, h, n0)
                counts = self._simulate_point(
                    make_generator(sim.seed, g), n_symbols, labeling, tx_points, h, post, candidates, n0
                )
                logger.info("%s @ %.2f dB: %d bit errors, %d symbol errors",
                            equalizers.kind, osnr, counts[0], counts[1])
                return counts

            counts = self._map_points(run_point, len(sim.osnr_db_grid))
            return BerReport(
                osnr_db=sim.osnr_db_grid,
                bits_per_symbol=labeling.bits_per_symbol,
                n_bits=n_symbols * labeling.bits_per_symbol,
                bit_errors=tuple(c[0] for c in counts),
                symbol_errors=tuple(c[1] for c in counts),
            )
        except CskError:
            raise
        except Exception as e:
            raise CskError(detail=f"Error in BER simulation: {str(e)}")

    def conventional_chain_ber(
        self,
        color_fractions: Sequence[float],
        avg_power: float,
        sim: SimConfig,
    ) -> BerReport:
        """
        Simulates the decoupled scheme: independent OOK per color with levels
        {0, 2 P_o f_x} and a threshold at half the level.

        Colors with a zero fraction carry no data and are not counted.

        Args:
            color_fractions: (red, green, blue) fractions
            avg_power: Average optical power P_o
            sim: Monte Carlo configuration (channel must be 3x3)

        Returns:
            BerReport with one bit per active color per symbol
        """
        levels = 2.0 * avg_power * np.asarray(color_fractions, dtype=float)
        active = np.flatnonzero(levels > 0)
        if active.size == 0:
            raise InvalidInputError("Conventional chain needs at least one color with nonzero power")
        h = sim.channel.matrix
        if h.shape != (3, 3):
            raise InvalidInputError("Conventional chain is defined for a single RGB LED")
        n_branches = active.size
        if sim.n_bits % n_branches:
            raise InvalidInputError(
                f"n_bits={sim.n_bits} is not a multiple of {n_branches} active colors"
            )
        n_symbols = sim.n_bits // n_branches

        def run_point(g: int) -> tuple[int, int]:
            n0 = noise_param_from_osnr(sim.osnr_db_grid[g], avg_power, sim.noise_n_blue)
            sigma = np.sqrt(n0 / 2.0)
            rng = make_generator(sim.seed, g)
            bit_errors = symbol_errors = 0
            for size in self._chunks(n_symbols):
                bits = rng.integers(0, 2, size=(size, n_branches))
                x = np.zeros((size, 3))
                x[:, active] = bits * levels[active]
                y = x @ h.T + sigma * standard_normal(rng, (size, 3))
                decided = (y[:, active] > levels[active] / 2.0).astype(bits.dtype)
                wrong = decided != bits
                bit_errors += int(wrong.sum())
                symbol_errors += int(wrong.any(axis=1).sum())
            return bit_errors, symbol_errors

        counts = self._map_points(run_point, len(sim.osnr_db_grid))
        return BerReport(
            osnr_db=sim.osnr_db_grid,
            bits_per_symbol=n_branches,
            n_bits=n_symbols * n_branches,
            bit_errors=tuple(c[0] for c in counts),
            symbol_errors=tuple(c[1] for c in counts),
        )

    def _simulate_point(
        self,
        rng: np.random.Generator,
        n_symbols: int,
        labeling: LabelingMap,
        tx_points: np.ndarray,
        h: np.ndarray,
        post: np.ndarray,
        candidates: np.ndarray,
        n0: float,
    ) -> tuple[int, int]:
        sigma = np.sqrt(n0 / 2.0)
        words_of = labeling.words
        symbol_of = labeling.symbol_of_word
        popcount = _popcount_table(labeling.bits_per_symbol)
        n_rx = h.shape[0]
        bit_errors = symbol_errors = 0
        for size in self._chunks(n_symbols):
            words = rng.integers(0, labeling.n_symbols, size=size)
            sent = symbol_of[words]
            y = tx_points[sent] @ h.T + sigma * standard_normal(rng, (size, n_rx))
            detected = detect_nearest_batch(y @ post.T, candidates)
            bit_errors += int(popcount[words ^ words_of[detected]].sum())
            symbol_errors += int(np.count_nonzero(detected != sent))
        return bit_errors, symbol_errors

    @staticmethod
    def _receiver(
        equalizers: EqualizerSet,
        constellation: Constellation,
        h: np.ndarray,
        n0: float,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Post matrix and the candidate images detection compares against."""
        points = constellation.array
        if equalizers.kind == "lmmse":
            if equalizers.n0 is None or equalizers.n0 != n0:
                equalizers = lmmse_equalizer(h, constellation, n0)
            post = equalizers.post
            # LMMSE output is biased; compare against the noiseless equalized images
            return post, points @ (post @ h).T
        return equalizers.post_matrix(h.shape[0]), points

    @staticmethod
    def _check_inputs(
        constellation: Constellation,
        labeling: LabelingMap,
        equalizers: EqualizerSet,
        sim: SimConfig,
    ) -> None:
        if constellation.n_symbols != labeling.n_symbols:
            raise InvalidInputError(
                f"Constellation has {constellation.n_symbols} points but the labeling {labeling.n_symbols}"
            )
        if sim.n_bits % labeling.bits_per_symbol:
            raise InvalidInputError(
                f"n_bits={sim.n_bits} is not a multiple of {labeling.bits_per_symbol} bits per symbol"
            )
        if equalizers.kind != sim.equalizer_kind:
            raise InvalidInputError(
                f"Equalizer kind {equalizers.kind} does not match the configured {sim.equalizer_kind}"
            )
        expected = "pre-equalized" if equalizers.kind == "svd-pre" else "intensity"
        if constellation.domain_tag != expected:
            raise InvalidDomainError(
                f"Equalizer {equalizers.kind} needs a {expected} constellation, got {constellation.domain_tag}"
            )

    def _chunks(self, total: int):
        done = 0
        while done < total:
            size = min(self.chunk_symbols, total - done)
            yield size
            done += size

    def _map_points(self, fn, n_points: int) -> list:
        if self.max_workers > 1 and n_points > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                return list(pool.map(fn, range(n_points)))
        return [fn(g) for g in range(n_points)]
