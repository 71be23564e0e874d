from fastapi import APIRouter

from app.modules.metrics.schemas import DragEnergyRequest, SpecificResistanceRequest
from app.modules.metrics.services.metrics_service import MetricsService

router = APIRouter()


@router.post("/drag-energy")
def drag_energy(request: DragEnergyRequest):
    return {"drag_energy": MetricsService.drag_energy(request.mean_Fx, request.l_channel)}


@router.post("/specific-resistance")
def specific_resistance(request: SpecificResistanceRequest):
    eta = MetricsService.specific_resistance(
        request.mean_power, request.mass, request.mean_velocity, request.g
    )
    return {"specific_resistance": eta}
