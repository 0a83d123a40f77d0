"""
Bit-to-symbol labeling by the binary switching algorithm (BSA).

The cost driven down by BSA is the union bound on the bit error rate,
(1 / (N_c N_B)) * sum_{i != j} hamming(w_i, w_j) * P(i -> j).
"""

import logging

import numpy as np
from scipy.special import erfc

from core.errors import InvalidInputError
from core.labeling.schema import PairwiseErrorMatrix
from core.model.schema import Constellation, LabelingMap
from core.rng import make_generator

logger = logging.getLogger(__name__)

MAX_PASSES = 1000


def q_function(x: float | np.ndarray) -> float | np.ndarray:
    """Gaussian upper tail Q(x) = erfc(x / sqrt(2)) / 2"""
    value = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(value) if np.ndim(value) == 0 else value


def pairwise_error_matrix(constellation: Constellation, n0: float) -> PairwiseErrorMatrix:
    """
    Pairwise error probabilities under white Gaussian noise of variance N0/2.

    Args:
        constellation: Symbol set (any domain)
        n0: Noise parameter N0 > 0

    Returns:
        PairwiseErrorMatrix with entries Q(d_ij / sqrt(2 N0)) and zero diagonal
    """
    if n0 <= 0:
        raise InvalidInputError(f"N0 must be positive, got {n0}")
    points = constellation.array
    dist = np.sqrt(np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1))
    prob = q_function(dist / np.sqrt(2.0 * n0))
    np.fill_diagonal(prob, 0.0)
    return PairwiseErrorMatrix(n=len(points), prob=prob, n0=n0)


def hamming_table(bits_per_symbol: int) -> np.ndarray:
    """Hamming distance between every pair of N_B-bit words."""
    words = np.arange(1 << bits_per_symbol)
    xor = words[:, None] ^ words[None, :]
    return np.array([[bin(v).count("1") for v in row] for row in xor], dtype=float)


def _cost(words: np.ndarray, prob: np.ndarray, hamming: np.ndarray, bits_per_symbol: int) -> float:
    n = len(words)
    return float(np.sum(hamming[np.ix_(words, words)] * prob) / (n * bits_per_symbol))


def union_bound_ber(labeling: LabelingMap, pem: PairwiseErrorMatrix) -> float:
    """
    Union-bound estimate of the BER of ``labeling``.

    Raises:
        InvalidInputError: If the labeling and the error matrix differ in size
    """
    if labeling.n_symbols != pem.n:
        raise InvalidInputError(
            f"Labeling has {labeling.n_symbols} symbols but the error matrix has {pem.n}"
        )
    return _cost(labeling.words, pem.prob, hamming_table(labeling.bits_per_symbol), labeling.bits_per_symbol)


class LabelingService:
    """
    Optimizes labelings with BSA.
    """

    def __init__(self, restarts: int = 10):
        self.restarts = max(1, restarts)

    def bsa_optimize(
        self,
        constellation: Constellation,
        n0: float,
        rng: np.random.Generator | int,
    ) -> LabelingMap:
        """
        Runs BSA from ``self.restarts`` random labelings and keeps the cheapest.

        Args:
            constellation: Symbol set with N_c = 2^N_B points
            n0: Design noise parameter
            rng: Generator, or an integer seed from which one sub-stream per restart is derived

        Returns:
            LabelingMap with its union-bound cost
        """
        n = constellation.n_symbols
        bits = n.bit_length() - 1
        if n < 2 or (1 << bits) != n:
            raise InvalidInputError(f"BSA needs a power-of-two constellation, got {n} points")
        pem = pairwise_error_matrix(constellation, n0)
        hamming = hamming_table(bits)

        best_words, best_cost = None, np.inf
        for k in range(self.restarts):
            gen = make_generator(rng, k) if isinstance(rng, (int, np.integer)) else rng
            start = gen.permutation(n)
            words, cost, _ = self.switch(start, pem.prob, hamming, bits)
            logger.debug("BSA restart %d: cost %.6g", k, cost)
            if cost < best_cost:
                best_words, best_cost = words, cost

        logger.info("BSA best union-bound cost %.6g over %d restarts", best_cost, self.restarts)
        return LabelingMap(bits_per_symbol=bits, word_of_symbol=tuple(int(w) for w in best_words), cost=best_cost)

    @staticmethod
    def switch(
        words: np.ndarray,
        prob: np.ndarray,
        hamming: np.ndarray,
        bits_per_symbol: int,
    ) -> tuple[np.ndarray, float, list[float]]:
        """
        One BSA descent from ``words``.

        Symbols are visited in decreasing order of their cost contribution; for the
        visited symbol every swap of its word with another symbol's word is tried and
        the one with the largest strict decrease is accepted, after which the pass
        restarts. The descent stops when a full pass finds no improving swap.

        Returns:
            (final words, final cost, cost after every accepted swap)
        """
        words = np.array(words, dtype=np.int64)
        n = len(words)
        cost = _cost(words, prob, hamming, bits_per_symbol)
        history = [cost]

        for _ in range(MAX_PASSES):
            contribution = np.sum(hamming[np.ix_(words, words)] * prob, axis=1)
            # stable sort keeps lower index first among equal contributions
            order = np.argsort(-contribution, kind="stable")
            improved = False
            for i in order:
                best_j, best_cost = -1, cost
                for j in range(n):
                    if j == i:
                        continue
                    words[i], words[j] = words[j], words[i]
                    trial = _cost(words, prob, hamming, bits_per_symbol)
                    words[i], words[j] = words[j], words[i]
                    if trial < best_cost:
                        best_j, best_cost = j, trial
                if best_j >= 0:
                    words[i], words[best_j] = words[best_j], words[i]
                    cost = best_cost
                    history.append(cost)
                    improved = True
                    break
            if not improved:
                return words, cost, history

        logger.warning("BSA stopped after %d passes without convergence", MAX_PASSES)
        return words, cost, history


def random_labeling(bits_per_symbol: int, rng: np.random.Generator) -> LabelingMap:
    perm = rng.permutation(1 << bits_per_symbol)
    return LabelingMap(bits_per_symbol=bits_per_symbol, word_of_symbol=tuple(int(w) for w in perm))
