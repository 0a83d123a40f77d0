import numpy as np
import pytest

from core.experiments import reference
from core.model.schema import COLOR_PROFILES, Constellation, DesignSpec, LabelingMap


@pytest.fixture
def balanced_spec() -> DesignSpec:
    return DesignSpec(color_fractions=COLOR_PROFILES["balanced"], restarts=4, seed=7)


@pytest.fixture
def balanced_8() -> Constellation:
    return Constellation.from_array(np.array(reference.BALANCED_8))


@pytest.fixture
def unbalanced_8() -> Constellation:
    return Constellation.from_array(np.array(reference.UNBALANCED_8))


@pytest.fixture
def extreme_8() -> Constellation:
    return Constellation.from_array(np.array(reference.EXTREME_8))


@pytest.fixture
def balanced_8_labeling(balanced_8) -> LabelingMap:
    """Published labeling of the balanced design, indexed by our symbol order."""
    word_of_point = {point: word for point, word in reference.BALANCED_8_LABELING}
    return LabelingMap(
        bits_per_symbol=3,
        word_of_symbol=tuple(word_of_point[tuple(p)] for p in reference.BALANCED_8),
    )


@pytest.fixture
def ook_pair() -> Constellation:
    """Single-LED on-off keying with amplitude 2."""
    return Constellation.from_array(np.array([[0.0], [2.0]]))
