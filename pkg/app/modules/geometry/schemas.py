from pydantic import BaseModel, Field, model_validator
from typing import NamedTuple


class Vec2(NamedTuple):
    """Point or vector in the channel plane (x along the channel, y lateral)."""
    x: float
    y: float


# Points and vectors share a representation
Point2 = Vec2


class SaturatedContact(NamedTuple):
    """Marker returned when the beam base lies inside the body; `phi` is still
    the furthest-forward intersection angle."""
    phi: float


class EllipseBody(BaseModel):
    """Rigid shell outline in the channel plane.

    R_x is the semi-axis along the channel, R_y the lateral one; X_r is the
    horizontal centre position.
    """
    R_x: float = Field(0.09, gt=0)
    R_y: float = Field(0.05, gt=0)
    X_r: float = 0.0
    mass: float = Field(0.087, gt=0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_axis_order(self):
        if self.R_x < self.R_y:
            raise ValueError(f"R_x ({self.R_x}) must be >= R_y ({self.R_y})")
        return self

    def at(self, X_r: float) -> "EllipseBody":
        return self.model_copy(update={"X_r": X_r})
