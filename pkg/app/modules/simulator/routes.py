from fastapi import APIRouter, HTTPException

from app.core.logging import logger
from app.modules.simulator.schemas import (
    PRESET_DEFLECTIONS,
    ChannelSpec,
    Preset,
    SweepRequest,
    SweepResponse,
)
from app.modules.simulator.services.simulator_service import SimulatorService

router = APIRouter()


@router.get("/presets")
def list_presets():
    return [
        {"name": preset.value, "deflection": d, "free": d is None}
        for preset, d in PRESET_DEFLECTIONS.items()
    ]


@router.get("/presets/{name}")
def get_preset(name: str):
    try:
        preset = Preset(name)
    except ValueError:
        raise HTTPException(status_code=404, detail=f"Unknown preset '{name}'")
    d = PRESET_DEFLECTIONS[preset]
    return {"name": preset.value, "deflection": d, "free": d is None}


@router.post("/sweep", response_model=SweepResponse)
def run_sweep(request: SweepRequest):
    # An explicit deflection wins over the preset
    if request.deflection is not None:
        deflection = request.deflection
    elif request.preset is not None:
        deflection = PRESET_DEFLECTIONS[request.preset]
    else:
        raise HTTPException(status_code=400, detail="Either preset or deflection is required")

    channel = ChannelSpec.from_deflection(
        deflection,
        request.body,
        n=request.n,
        l_channel=request.l_channel,
        spacing_override=request.spacing_override,
        beam=request.beam,
    )
    logger.info(f"Sweep requested: deflection={deflection} dx={request.dx}")
    trace = SimulatorService.sweep(channel, request.body, request.dx, request.v)
    summary = SimulatorService.summarize(trace, channel, request.body)
    return SweepResponse(
        channel=channel,
        summary=summary,
        samples=trace.samples if request.include_samples else None,
    )
