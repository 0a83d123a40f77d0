from itertools import product
from typing import Sequence

import numpy as np

from core.baselines.schema import DecoupledScheme
from core.errors import InvalidInputError
from core.model.schema import COLOR_SUM_TOL, Constellation, LabelingMap


def decoupled_constellation(color_fractions: Sequence[float], avg_power: float) -> DecoupledScheme:
    """
    Builds the conventional decoupled OOK scheme for one RGB LED.

    Color x switches between 0 and 2 P_o f_x, so its mean is P_o f_x. The joint
    constellation is the product over colors that carry power; symbol index is
    the bit pattern with the first active color as the most significant bit,
    and the natural labeling maps word k to symbol k.

    Args:
        color_fractions: (red, green, blue) fractions summing to 1
        avg_power: Average optical power P_o

    Returns:
        DecoupledScheme with levels, joint constellation and natural labeling

    Raises:
        InvalidInputError: If the fractions are invalid
    """
    fractions = np.asarray(color_fractions, dtype=float)
    if fractions.shape != (3,) or np.any(fractions < 0) or abs(fractions.sum() - 1.0) > COLOR_SUM_TOL:
        raise InvalidInputError(f"Invalid color fractions {list(color_fractions)}")
    if avg_power <= 0:
        raise InvalidInputError("Average power must be positive")

    levels = 2.0 * avg_power * fractions
    active = tuple(int(x) for x in np.flatnonzero(levels > 0))
    points = []
    for bits in product((0, 1), repeat=len(active)):
        point = np.zeros(3)
        for bit, color in zip(bits, active):
            point[color] = bit * levels[color]
        points.append(point)

    joint = Constellation.from_array(np.array(points), "intensity")
    return DecoupledScheme(
        levels=tuple(float(v) for v in levels),
        active_colors=active,
        joint=joint,
        natural_labeling=LabelingMap.natural(len(active)),
    )
