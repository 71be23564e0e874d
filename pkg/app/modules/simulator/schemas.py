from pydantic import BaseModel, Field
from typing import Dict, List, Optional
import enum

from app.modules.beam.schemas import BeamSpec, ContactResult
from app.modules.geometry.schemas import EllipseBody


class Preset(str, enum.Enum):
    free = "free"
    d0 = "d0"
    d1 = "d1"
    d2 = "d2"
    d3 = "d3"


# Maximum beam-tip deflection per preset [m]; None is the free run outside the track
PRESET_DEFLECTIONS: Dict[Preset, Optional[float]] = {
    Preset.free: None,
    Preset.d0: 0.0,
    Preset.d1: 0.01,
    Preset.d2: 0.02,
    Preset.d3: 0.03,
}


class ChannelSpec(BaseModel):
    """
    Beam row along the channel. `b` is the tip-to-tip gap; None means no
    beams at all (free running). Beam bases sit on the wall at y = b/2 + L.
    """
    n: int = Field(11, ge=1)
    l_channel: float = Field(0.28, gt=0)
    b: Optional[float] = Field(None, ge=0)
    spacing_override: Optional[float] = Field(None, gt=0)
    x0: float = 0.0
    # longitudinal shift of the bottom row; only the two-sided sweep models it
    stagger: float = 0.0
    beam: BeamSpec = BeamSpec()

    class Config:
        frozen = True

    @property
    def free(self) -> bool:
        return self.b is None

    @property
    def wall_y(self) -> float:
        return self.b / 2.0 + self.beam.L

    @classmethod
    def from_deflection(cls, deflection: Optional[float], body: EllipseBody, **kwargs) -> "ChannelSpec":
        """Channel width from the maximum deflection: b = 2 R_y - 2 d."""
        if deflection is None:
            return cls(b=None, **kwargs)
        return cls(b=2.0 * body.R_y - 2.0 * deflection, **kwargs)


class Side(str, enum.Enum):
    top = "top"
    bottom = "bottom"


class SideContact(ContactResult):
    side: Side = Side.top


class ForceSample(BaseModel):
    X_r: float
    t: float
    F_drag: float
    contact_count: int = Field(ge=0)
    contacts: List[SideContact] = []
    fy_net: Optional[float] = None


class ForceTrace(BaseModel):
    samples: List[ForceSample]
    dx: float = Field(gt=0)
    v: float = Field(gt=0)
    direction: int = 1
    two_sided: bool = False


class TraceSummary(BaseModel):
    n_samples: int
    plateau_samples: int
    plateau_mean_drag: float
    plateau_min_drag: float
    plateau_max_drag: float
    plateau_contact_counts: List[int]
    max_contact_count: int
    saturated_contacts: int
    peak_drag: float
    drag_energy: float  # plateau mean drag x channel length
    transit_work: float  # integral of drag over the swept distance


class SweepRequest(BaseModel):
    preset: Optional[Preset] = Preset.d3
    deflection: Optional[float] = None
    body: EllipseBody = EllipseBody()
    beam: BeamSpec = BeamSpec()
    n: int = Field(11, ge=1)
    l_channel: float = Field(0.28, gt=0)
    spacing_override: Optional[float] = Field(None, gt=0)
    dx: float = Field(1e-3, gt=0)
    v: float = Field(0.05, gt=0)
    include_samples: bool = False


class SweepResponse(BaseModel):
    channel: ChannelSpec
    summary: TraceSummary
    samples: Optional[List[ForceSample]] = None
