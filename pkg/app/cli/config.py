from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.modules.beam.schemas import BeamSpec
from app.modules.geometry.schemas import EllipseBody
from app.modules.simulator.schemas import PRESET_DEFLECTIONS, ChannelSpec, Preset

OUTPUT_FORMATS = ("csv", "json", "svg")
DEFAULT_DEFLECTION = PRESET_DEFLECTIONS[Preset.d3]


class BodyConfig(BaseModel):
    r_x: float = Field(0.09, gt=0)
    r_y: float = Field(0.05, gt=0)
    mass: float = Field(0.087, gt=0)


class BeamConfig(BaseModel):
    modulus: float = Field(5.3e9, gt=0)
    width: float = Field(0.03, gt=0)
    length: float = Field(0.027, gt=0)
    thickness: float = Field(1.2e-4, gt=0)
    mu_s: float = Field(0.7, gt=0)
    mu_k: float = Field(0.53, ge=0)


class ChannelConfig(BaseModel):
    n: int = Field(11, ge=1)
    l_channel: float = Field(0.28, gt=0)
    deflection: Optional[float] = None  # d
    width: Optional[float] = Field(None, ge=0)  # b
    free: bool = False
    spacing_override: Optional[float] = Field(None, gt=0)
    stagger: float = 0.0
    @model_validator(mode="after")
    def default_deflection(self):
        # neither given: the deepest preset channel
        if not self.free and self.deflection is None and self.width is None:
            self.deflection = DEFAULT_DEFLECTION
        return self


class SweepConfig(BaseModel):
    dx: float = Field(1e-3, gt=0)
    v: float = Field(0.05, gt=0)


class AnalysisConfig(BaseModel):
    threshold: float = Field(0.05, gt=0)
    hysteresis: float = Field(0.02, ge=0)
    min_duration: float = Field(0.25, ge=0)
    g: float = Field(settings.gravity, gt=0)
    phase_bins: int = Field(12, ge=1)


class OutputConfig(BaseModel):
    directory: str = settings.output_dir
    formats: List[str] = list(OUTPUT_FORMATS)

    @model_validator(mode="after")
    def check_formats(self):
        unknown = sorted(set(self.formats) - set(OUTPUT_FORMATS))
        if unknown:
            raise ValueError(f"unknown output formats {unknown}")
        return self


class RunConfig(BaseSettings):
    """
    Run configuration. Files use .env syntax with `__` between section and key:

        CHANNEL__DEFLECTION=0.03
        SWEEP__DX=0.0005
    """
    body: BodyConfig = BodyConfig()
    beam: BeamConfig = BeamConfig()
    channel: ChannelConfig = ChannelConfig()
    sweep: SweepConfig = SweepConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    output: OutputConfig = OutputConfig()

    class Config:
        env_prefix = ""
        env_nested_delimiter = "__"
        extra = "forbid"

    @model_validator(mode="after")
    def check_width_relation(self):
        c = self.channel
        if not c.free and c.deflection is not None and c.width is not None:
            expected = 2.0 * self.body.r_y - 2.0 * c.deflection
            if abs(expected - c.width) > 1e-9:
                raise ValueError(
                    f"width {c.width} inconsistent with deflection {c.deflection}: expected {expected:.6g}"
                )
        return self

    def ellipse(self) -> EllipseBody:
        return EllipseBody(R_x=self.body.r_x, R_y=self.body.r_y, mass=self.body.mass)

    def channel_spec(self) -> ChannelSpec:
        c = self.channel
        b = self.beam
        beam = BeamSpec(E=b.modulus, w=b.width, L=b.length, t=b.thickness, mu_s=b.mu_s, mu_k=b.mu_k)
        common = dict(
            n=c.n, l_channel=c.l_channel, spacing_override=c.spacing_override, stagger=c.stagger, beam=beam
        )
        if c.free:
            return ChannelSpec(b=None, **common)
        if c.width is not None:
            return ChannelSpec(b=c.width, **common)
        return ChannelSpec.from_deflection(c.deflection, self.ellipse(), **common)


def _config_error(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "config"
    return ConfigError(first["msg"], key=key)


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def preset_overrides(preset: Preset) -> Dict[str, Any]:
    deflection = PRESET_DEFLECTIONS[preset]
    if deflection is None:
        return {"channel": {"free": True, "deflection": None, "width": None}}
    return {"channel": {"free": False, "deflection": deflection, "width": None}}


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Config file first, then flag overrides (flags win)."""
    if path is not None and not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}", key="config")
    try:
        config = RunConfig(_env_file=path)
        if overrides:
            config = RunConfig(_env_file=None, **merge_overrides(config.model_dump(), overrides))
    except ValidationError as e:
        raise _config_error(e) from e
    return config
