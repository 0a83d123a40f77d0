"""
Elementary constellation geometry: distances, average color and optical PAPR.

LED ordering inside a symbol vector is always [red..., green..., blue...],
so colour selection is plain index slicing.
"""

from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from core.errors import InvalidDomainError, InvalidInputError, UndefinedPaprError
from core.model.schema import Constellation, DesignSpec

PAPR_ZERO_MEAN_TOL = 1e-12


def minimum_euclidean_distance(points: Sequence[Sequence[float]] | np.ndarray) -> float:
    """
    Computes the minimum pairwise Euclidean distance (MED) of a point set.

    Args:
        points: N >= 2 vectors of equal dimension

    Returns:
        min over unordered pairs of ||p_i - p_j||

    Raises:
        InvalidInputError: If fewer than 2 points or dimensions differ
    """
    if len(points) < 2:
        raise InvalidInputError("MED needs at least 2 points")
    if not isinstance(points, np.ndarray):
        dims = {len(p) for p in points}
        if len(dims) != 1:
            raise InvalidInputError(f"Dimension mismatch among points: {sorted(dims)}")
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError("Points must form a 2-D array")
    return float(pdist(arr).min())


def average_color_vector(constellation: Constellation, spec: DesignSpec) -> np.ndarray:
    """
    Average power of each color, K J_bar c_T.

    Args:
        constellation: Intensity-domain constellation with dim = N_T
        spec: Design spec giving the LED grouping

    Returns:
        3-vector (red, green, blue)

    Raises:
        InvalidDomainError: If the constellation is not in the intensity domain
    """
    if constellation.domain_tag != "intensity":
        raise InvalidDomainError("Average color is only defined for intensity constellations")
    if constellation.dim != spec.n_leds:
        raise InvalidInputError(
            f"Constellation dimension {constellation.dim} does not match {spec.n_leds} LEDs"
        )
    per_led = constellation.array.mean(axis=0)
    return np.array([per_led[s].sum() for s in spec.color_slices])


def papr_per_led(constellation: Constellation) -> np.ndarray:
    """
    Optical PAPR of every LED: peak intensity over mean intensity.

    Args:
        constellation: Intensity-domain constellation

    Returns:
        Vector of length N_T

    Raises:
        InvalidDomainError: If the constellation is not in the intensity domain
        UndefinedPaprError: If an LED has zero mean intensity
    """
    if constellation.domain_tag != "intensity":
        raise InvalidDomainError("PAPR is only defined for intensity constellations")
    arr = constellation.array
    mean = arr.mean(axis=0)
    for j, m in enumerate(mean):
        if m <= PAPR_ZERO_MEAN_TOL:
            raise UndefinedPaprError(j)
    return arr.max(axis=0) / mean


def power_gain_db(med_new: float, med_ref: float) -> float:
    """Asymptotic power gain 20*log10(med_new / med_ref)"""
    if med_new <= 0 or med_ref <= 0:
        raise InvalidInputError("Power gain needs positive distances")
    return float(20.0 * np.log10(med_new / med_ref))
