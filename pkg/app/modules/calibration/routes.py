import io
import json
from typing import Optional

from fastapi import APIRouter, File, Form, UploadFile

from app.core.exceptions import DatasetSchemaError, ShellDragError
from app.modules.calibration.services.calibration_service import CalibrationService

router = APIRouter()


@router.post("/fit")
async def fit_calibration(
    file: UploadFile = File(...),
    split: float = Form(0.8, gt=0, le=1),
    seed: Optional[int] = Form(0),
):
    raw = await file.read()
    try:
        try:
            content = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DatasetSchemaError(f"calibration upload is not UTF-8 text: {e.reason}") from e
        data = CalibrationService.read_dataset(io.StringIO(content))
        report = CalibrationService.evaluate(data, split, seed)
    except ShellDragError as e:
        raise e.with_source(file.filename or "upload")
    return {
        "model": json.loads(CalibrationService.dump_model(report.model)),
        "n_test": report.n_test,
        "train_rms": report.train_rms,
        "test_rms": report.test_rms,
    }
