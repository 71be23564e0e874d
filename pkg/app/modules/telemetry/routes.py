import io

from fastapi import APIRouter, File, Form, UploadFile

from app.core.config import settings
from app.core.exceptions import ShellDragError, TelemetrySchemaError
from app.modules.metrics.services.metrics_service import MetricsService
from app.modules.telemetry.services.telemetry_service import TelemetryService

router = APIRouter()


@router.post("/analyze")
async def analyze_trial(
    file: UploadFile = File(...),
    l_channel: float = Form(0.28),
    mass: float = Form(0.087),
    threshold: float = Form(0.05),
    hysteresis: float = Form(0.02),
):
    """Upload a telemetry CSV and get the in-channel window and trial metrics."""
    raw = await file.read()
    try:
        try:
            content = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise TelemetrySchemaError(f"telemetry upload is not UTF-8 text: {e.reason}") from e
        records = TelemetryService.parse(io.StringIO(content))
        window = TelemetryService.detect_window(records, threshold, hysteresis)
        metrics = MetricsService.trial_metrics(records, window, l_channel, mass, settings.gravity)
    except ShellDragError as e:
        raise e.with_source(file.filename or "upload")
    return {"window": window, "metrics": metrics}
