from pydantic import BaseModel, Field
from typing import List, Optional

# Bit-exact CSV header, in column order
TELEMETRY_COLUMNS = ["t_s", "fx_n", "fy_n", "fz_n", "leg_left_rad", "leg_right_rad", "power_w"]
RECORD_FIELDS = ["t", "fx", "fy", "fz", "leg_left", "leg_right", "power"]


class TelemetryRecord(BaseModel):
    t: float
    fx: float
    fy: float
    fz: float
    leg_left: float
    leg_right: float
    power: float

    class Config:
        frozen = True


class ChannelWindow(BaseModel):
    """In-channel interval. `free_run` marks traces without a sustained drag
    crossing; the window then spans the whole trace."""
    t_enter: float
    t_exit: float
    free_run: bool = False


class SyntheticTrialSpec(BaseModel):
    rate_hz: float = Field(100.0, gt=0)
    speed: float = Field(0.05, gt=0)  # forward speed in the channel [m/s]
    lead_in: float = Field(2.0, ge=0)  # free running before the channel [s]
    lead_out: float = Field(2.0, ge=0)
    stride_hz: float = Field(1.0, gt=0)
    oscillation: float = Field(0.3, ge=0)  # stride-periodic drag ripple, fraction of drag
    lift_ratio: float = Field(0.5, ge=0)  # negative lift per unit drag
    power: float = Field(2.0, ge=0)  # mean electrical power [W]
    power_ripple: float = Field(0.2, ge=0)
    noise: List[float] = [0.040, 0.015, 0.048]  # zero-input RMS floors per axis [N]
    seed: Optional[int] = 0
