import numpy as np
import pytest

from core.channel.services import (
    crosstalk_channel,
    identity_equalizers,
    lmmse_equalizer,
    noise_gain,
    svd_equalizers,
    zf_equalizer,
)
from core.errors import DegenerateChannelError, InvalidInputError, SingularChannelError, UnsupportedModelError
from core.model.schema import Constellation

EPS_GRID = [0.0, 0.05, 0.1, 0.15, 0.2]


def test_no_crosstalk_is_identity():
    np.testing.assert_array_equal(crosstalk_channel(0.0).matrix, np.eye(3))


@pytest.mark.parametrize("eps", EPS_GRID)
def test_crosstalk_rows_sum_to_one(eps):
    h = crosstalk_channel(eps).matrix
    np.testing.assert_allclose(h.sum(axis=1), np.ones(3))
    np.testing.assert_allclose(h, h.T)


@pytest.mark.parametrize("eps", [-0.1, 0.5, 0.7])
def test_crosstalk_rejects_eps_out_of_range(eps):
    with pytest.raises(InvalidInputError):
        crosstalk_channel(eps)


def test_crosstalk_needs_three_leds():
    with pytest.raises(UnsupportedModelError):
        crosstalk_channel(0.1, n_leds=6)


@pytest.mark.parametrize("eps", EPS_GRID)
def test_svd_chain_is_identity(eps):
    channel = crosstalk_channel(eps)
    eq = svd_equalizers(channel)
    assert eq.rank == 3
    np.testing.assert_allclose(eq.post @ channel.matrix @ eq.pre, np.eye(3), atol=1e-10)


@pytest.mark.parametrize("eps", EPS_GRID)
def test_svd_post_keeps_noise_white(eps):
    eq = svd_equalizers(crosstalk_channel(eps))
    np.testing.assert_allclose(eq.post @ eq.post.T, np.eye(3), atol=1e-12)


def test_svd_is_sign_normalized():
    eq = svd_equalizers(crosstalk_channel(0.1))
    for column in eq.pre.T:
        first = column[np.flatnonzero(np.abs(column) > 1e-10)[0]]
        assert first > 0


def test_svd_of_rank_deficient_channel():
    h = np.ones((3, 3))
    eq = svd_equalizers(h)
    assert eq.rank == 1
    np.testing.assert_allclose(eq.post @ h @ eq.pre, np.eye(1), atol=1e-10)


def test_svd_of_zero_channel():
    with pytest.raises(DegenerateChannelError):
        svd_equalizers(np.zeros((3, 3)))


@pytest.mark.parametrize("eps", EPS_GRID)
def test_zero_forcing_inverts_channel(eps):
    channel = crosstalk_channel(eps)
    eq = zf_equalizer(channel)
    np.testing.assert_allclose(eq.post @ channel.matrix, np.eye(3), atol=1e-10)


def test_zero_forcing_amplifies_noise_under_strong_crosstalk():
    assert noise_gain(zf_equalizer(crosstalk_channel(0.2))) > 3.0


def test_zero_forcing_of_singular_channel():
    with pytest.raises(SingularChannelError):
        zf_equalizer(np.ones((3, 3)))


def test_lmmse_approaches_zero_forcing_at_low_noise(balanced_8):
    channel = crosstalk_channel(0.1)
    eq = lmmse_equalizer(channel, balanced_8, 1e-12)
    np.testing.assert_allclose(eq.post, np.linalg.inv(channel.matrix), atol=1e-6)
    assert eq.n0 == 1e-12


def test_lmmse_shrinks_at_high_noise(balanced_8):
    channel = crosstalk_channel(0.1)
    quiet = lmmse_equalizer(channel, balanced_8, 1e-3)
    noisy = lmmse_equalizer(channel, balanced_8, 1e3)
    assert noise_gain(noisy) < noise_gain(quiet)


def test_lmmse_minimizes_the_mean_squared_error(balanced_8):
    h = crosstalk_channel(0.1).matrix
    n0 = 4.0
    points = balanced_8.array
    r_c = points.T @ points / len(points)

    def mse(g):
        err = g @ h - np.eye(3)
        return float(np.trace(err @ r_c @ err.T) + 0.5 * n0 * np.sum(g ** 2))

    g = lmmse_equalizer(h, balanced_8, n0).post
    best = mse(g)
    rng = np.random.default_rng(9)
    for _ in range(20):
        direction = rng.standard_normal((3, 3))
        direction /= np.linalg.norm(direction)
        assert mse(g + 1e-4 * direction) >= best - 1e-12 * best


def test_lmmse_is_a_scalar_wiener_filter_on_white_symbols():
    sigma2, n0 = 2.0, 0.5
    # six points +-a e_k have second moment (a^2 / 3) I
    a = np.sqrt(3.0 * sigma2)
    points = np.vstack([a * np.eye(3), -a * np.eye(3)])
    constellation = Constellation.from_array(points, "pre-equalized")

    eq = lmmse_equalizer(np.eye(3), constellation, n0)
    np.testing.assert_allclose(eq.post, sigma2 / (sigma2 + 0.5 * n0) * np.eye(3), atol=1e-12)


def test_lmmse_needs_positive_noise(balanced_8):
    with pytest.raises(InvalidInputError):
        lmmse_equalizer(crosstalk_channel(0.1), balanced_8, 0.0)


def test_identity_equalizers():
    eq = identity_equalizers(3)
    np.testing.assert_array_equal(eq.post_matrix(3), np.eye(3))
    assert noise_gain(eq) == 3.0
