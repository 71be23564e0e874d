from pydantic import BaseModel, Field, model_validator

from app.modules.geometry.schemas import Vec2


class BeamSpec(BaseModel):
    """Fibreglass cantilever. Defaults are the measured track properties."""
    E: float = Field(5.3e9, gt=0)  # flexural modulus [Pa]
    w: float = Field(0.03, gt=0)
    L: float = Field(0.027, gt=0)
    t: float = Field(1.2e-4, gt=0)
    mu_k: float = Field(0.53, ge=0)
    mu_s: float = Field(0.7, gt=0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_thin_beam(self):
        if self.mu_k > self.mu_s:
            raise ValueError(f"mu_k ({self.mu_k}) must not exceed mu_s ({self.mu_s})")
        if self.t >= self.L:
            raise ValueError(f"beam thickness ({self.t}) must be much smaller than its length ({self.L})")
        return self


class ContactResult(BaseModel):
    beam_index: int = Field(ge=1)
    phi: float
    X_i: float
    delta_theta: float = Field(ge=0)
    force: Vec2
    saturated: bool = False

    class Config:
        frozen = True
