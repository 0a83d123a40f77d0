"""
Seeded random streams.

All randomness goes through a Philox (64-bit counter-based) generator so
that a (seed, stream indices) pair always reproduces the same draws.
Gaussian variates are produced by a fixed Box-Muller transform of the
generator's uniforms instead of numpy's own normal sampler.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """
    Builds an independent generator for ``seed`` and a sub-stream path.

    Args:
        seed: Unsigned 64-bit master seed
        *stream: Non-negative integers identifying the sub-stream
            (restart index, grid point index, ...)

    Returns:
        numpy Generator backed by Philox
    """
    entropy = [int(seed) & MASK64, *(int(s) for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def standard_normal(rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    """
    Draws standard normal variates with the Box-Muller transform.

    Args:
        rng: Generator to consume uniforms from
        size: Output shape

    Returns:
        Array of N(0, 1) samples with the requested shape
    """
    shape = (size,) if isinstance(size, int) else tuple(size)
    count = int(np.prod(shape, dtype=np.int64))
    half = (count + 1) // 2

    # u1 in (0, 1] keeps the log finite
    u1 = 1.0 - rng.random(half)
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2

    z = np.empty(2 * half)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count].reshape(shape)
