"""
Cross-talk channel model and linear equalizers.

The SVD pair splits H = U S V^T into a transmit pre-equalizer P = V_r S_r^-1
and a receive post-equalizer U_r^T, so post @ H @ pre = I_r and the received
noise stays white. ZF and LMMSE are receive-only alternatives.
"""

import numpy as np

from core.channel.schema import ChannelModel, EqualizerSet
from core.errors import DegenerateChannelError, InvalidInputError, SingularChannelError, UnsupportedModelError
from core.model.schema import Constellation

RANK_TOL = 1e-10


def crosstalk_channel(eps: float, n_leds: int = 3) -> ChannelModel:
    """
    Canonical RGB cross-talk matrix where each filter leaks ``eps`` of its neighbour bands.

    Args:
        eps: Leakage, 0 <= eps < 0.5
        n_leds: Must be 3 (one RGB triplet)

    Returns:
        Symmetric tridiagonal ChannelModel with unit row sums

    Raises:
        InvalidInputError: If eps is outside [0, 0.5)
        UnsupportedModelError: If n_leds != 3
    """
    if n_leds != 3:
        raise UnsupportedModelError(f"The canonical cross-talk model needs 3 LEDs, got {n_leds}")
    if not 0.0 <= eps < 0.5:
        raise InvalidInputError(f"Cross-talk eps must lie in [0, 0.5), got {eps}")
    matrix = np.array([
        [1.0 - eps, eps, 0.0],
        [eps, 1.0 - 2.0 * eps, eps],
        [0.0, eps, 1.0 - eps],
    ])
    return ChannelModel(matrix=matrix, eps=eps)


def _as_matrix(h: ChannelModel | np.ndarray) -> np.ndarray:
    matrix = h.matrix if isinstance(h, ChannelModel) else np.asarray(h, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"Channel matrix must be square, got shape {matrix.shape}")
    return matrix


def identity_equalizers(n_leds: int) -> EqualizerSet:
    return EqualizerSet(kind="identity", rank=n_leds)


def svd_equalizers(h: ChannelModel | np.ndarray) -> EqualizerSet:
    """
    Builds the SVD pre/post equalizer pair.

    Singular vectors are sign-normalized (first nonzero entry of each right
    singular vector positive) so the pair is deterministic.

    Args:
        h: Channel model or square matrix

    Returns:
        EqualizerSet of kind svd-pre with pre = V_r S_r^-1 and post = U_r^T

    Raises:
        DegenerateChannelError: If H has no singular value above tolerance
    """
    matrix = _as_matrix(h)
    u, s, vt = np.linalg.svd(matrix)
    if s.size == 0 or s[0] <= 0:
        raise DegenerateChannelError("Channel matrix is zero; nothing can be transmitted")
    r = int(np.sum(s > RANK_TOL * s[0]))
    u, s, v = u[:, :r], s[:r], vt[:r].T

    for k in range(r):
        nonzero = np.flatnonzero(np.abs(v[:, k]) > RANK_TOL)
        if nonzero.size and v[nonzero[0], k] < 0:
            v[:, k] *= -1.0
            u[:, k] *= -1.0

    return EqualizerSet(kind="svd-pre", pre=v / s, post=u.T, rank=r)


def zf_equalizer(h: ChannelModel | np.ndarray) -> EqualizerSet:
    """
    Zero-forcing receive matrix H^-1, computed by an LU solve.

    Raises:
        SingularChannelError: If H is rank deficient
    """
    matrix = _as_matrix(h)
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise SingularChannelError("Channel matrix is rank deficient; zero-forcing is undefined")
    n = matrix.shape[0]
    post = np.linalg.solve(matrix, np.eye(n))
    return EqualizerSet(kind="zf", post=post, rank=n)


def lmmse_equalizer(h: ChannelModel | np.ndarray, constellation: Constellation, n0: float) -> EqualizerSet:
    """
    Linear MMSE receive matrix for equiprobable symbols.

    G = R_c H^T (H R_c H^T + (N0/2) I)^-1 with R_c the uncentered second moment.

    Args:
        h: Channel model or matrix
        constellation: Transmitted symbol set
        n0: Noise parameter N0 (> 0); per-dimension variance is N0/2

    Returns:
        EqualizerSet of kind lmmse

    Raises:
        InvalidInputError: If n0 <= 0 or the constellation is empty
    """
    if n0 <= 0:
        raise InvalidInputError(f"N0 must be positive, got {n0}")
    matrix = _as_matrix(h)
    points = constellation.array
    if points.size == 0:
        raise InvalidInputError("LMMSE needs a nonempty constellation")
    r_c = points.T @ points / points.shape[0]
    n = matrix.shape[0]
    gram = matrix @ r_c @ matrix.T + 0.5 * n0 * np.eye(n)
    # G = R_c H^T gram^-1, solved as gram^T G^T = H R_c^T
    post = np.linalg.solve(gram.T, matrix @ r_c.T).T
    return EqualizerSet(kind="lmmse", post=post, rank=n, n0=n0)


def noise_gain(equalizers: EqualizerSet) -> float:
    """Frobenius norm squared of the receive matrix (noise amplification)"""
    if equalizers.post is None:
        return float(equalizers.rank)
    return float(np.sum(equalizers.post ** 2))
