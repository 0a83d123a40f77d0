from typing import Tuple

from pydantic import BaseModel, ConfigDict

from core.model.schema import Constellation, LabelingMap


class DecoupledScheme(BaseModel):
    """Independent OOK per color at matched power and color"""
    model_config = ConfigDict(frozen=True)

    levels: Tuple[float, float, float]
    active_colors: Tuple[int, ...]
    joint: Constellation
    natural_labeling: LabelingMap
