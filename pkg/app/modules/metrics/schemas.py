from pydantic import BaseModel, Field
from typing import List


class StrideMetrics(BaseModel):
    t_start: float
    t_end: float
    drag_energy: float
    electrical_energy: float
    specific_resistance: float


class TrialMetrics(BaseModel):
    """
    Per-trial statistics over the in-channel window. mean_Fx is the mean
    resisting component (-fx), so drag_energy = mean_Fx * l_channel.
    """
    t_enter: float
    t_exit: float
    mean_Fx: float
    mean_Fz: float
    mean_power: float
    mean_velocity: float
    drag_energy: float
    electrical_energy: float
    specific_resistance: float
    per_stride: List[StrideMetrics] = []

    def to_summary(self) -> dict:
        return {
            "mean_fx_n": self.mean_Fx,
            "mean_fz_n": self.mean_Fz,
            "mean_power_w": self.mean_power,
            "mean_velocity_mps": self.mean_velocity,
            "drag_energy_j": self.drag_energy,
            "electrical_energy_j": self.electrical_energy,
            "specific_resistance": self.specific_resistance,
            "strides": [s.model_dump() for s in self.per_stride],
        }


class BoxStats(BaseModel):
    count: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


class PhaseProfile(BaseModel):
    """Drag and lift averaged over leg-phase bins (bin centres in rad)."""
    phase: List[float]
    drag: List[float]
    lift: List[float]
    counts: List[int]


class DragEnergyRequest(BaseModel):
    mean_Fx: float
    l_channel: float = Field(0.28, gt=0)


class SpecificResistanceRequest(BaseModel):
    mean_power: float
    mass: float = Field(0.087, gt=0)
    mean_velocity: float
    g: float = Field(9.81, gt=0)
