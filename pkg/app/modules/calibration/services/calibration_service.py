import io
import json
from typing import Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import (
    DatasetRowError,
    DatasetSchemaError,
    DegenerateExcitationError,
    EmptyDatasetError,
)
from app.core.logging import logger
from app.modules.calibration.schemas import (
    DATASET_COLUMNS,
    SENSOR_CHANNELS,
    CalibrationData,
    CalibrationModel,
    CalibrationReport,
    SensorForwardModel,
)

# Three force axes plus the bias must be excited
MIN_DESIGN_RANK = 4

Dataset = Union[CalibrationData, Sequence[Tuple[Sequence[float], Sequence[float]]]]


def _as_data(data: Dataset) -> CalibrationData:
    if isinstance(data, CalibrationData):
        return data
    pairs = list(data)
    if not pairs:
        return CalibrationData(np.empty((0, SENSOR_CHANNELS)), np.empty((0, 3)))
    readings = np.array([p[0] for p in pairs], dtype=float)
    forces = np.array([p[1] for p in pairs], dtype=float)
    return CalibrationData(readings, forces)


def _to_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        return np.nan


def _augment(readings: np.ndarray) -> np.ndarray:
    return np.hstack([readings, np.ones((readings.shape[0], 1))])


class CalibrationService:

    @staticmethod
    def synth_dataset(model: SensorForwardModel, forces, seed: Optional[int] = None) -> CalibrationData:
        forces = np.atleast_2d(np.asarray(forces, dtype=float))
        readings = forces @ model.jacobian.T + np.asarray(model.offset)
        if model.noise_sigma > 0:
            rng = np.random.default_rng(seed)
            readings = readings + rng.normal(0.0, model.noise_sigma, size=readings.shape)
        return CalibrationData(readings, forces)

    @staticmethod
    def random_forces(n: int, scale: float = 1.0, seed: Optional[int] = None) -> np.ndarray:
        """Gaussian excitation on all three axes."""
        return np.random.default_rng(seed).normal(0.0, scale, size=(n, 3))

    @staticmethod
    def force_equivalent_noise(model: SensorForwardModel) -> np.ndarray:
        """Per-axis force noise of the least-squares inverse: sigma * sqrt(diag((J^T J)^-1))."""
        J = model.jacobian
        return model.noise_sigma * np.sqrt(np.diag(np.linalg.inv(J.T @ J)))

    @staticmethod
    def fit(data: Dataset) -> CalibrationModel:
        """
        Least-squares map from [readings; 1] to force. Solved by SVD-based
        lstsq (minimum-norm when readings only span the force subspace).
        """
        data = _as_data(data)
        n = len(data)
        if n < SENSOR_CHANNELS + 1:
            raise DegenerateExcitationError(
                f"need at least {SENSOR_CHANNELS + 1} samples to fit, got {n}"
            )
        A = _augment(data.readings)
        rank = int(np.linalg.matrix_rank(A))
        if rank < MIN_DESIGN_RANK:
            raise DegenerateExcitationError(
                f"design matrix rank {rank} < {MIN_DESIGN_RANK}: forces did not excite every axis"
            )
        solution, _, _, _ = np.linalg.lstsq(A, data.forces, rcond=None)
        C = solution.T
        residual = A @ solution - data.forces
        rms = np.sqrt(np.mean(residual ** 2, axis=0))
        logger.info(f"Calibration fit on {n} samples (rank {rank}): rms {np.round(rms, 4).tolist()} N")
        return CalibrationModel(c=C.tolist(), rms=rms.tolist(), n_train=n)

    @staticmethod
    def apply(model: CalibrationModel, readings) -> np.ndarray:
        readings = np.asarray(readings, dtype=float)
        if readings.ndim == 1:
            return model.matrix @ np.append(readings, 1.0)
        return _augment(readings) @ model.matrix.T

    @staticmethod
    def rms_error(model: CalibrationModel, data: Dataset) -> np.ndarray:
        data = _as_data(data)
        if len(data) == 0:
            raise EmptyDatasetError("rms error needs at least one sample")
        residual = CalibrationService.apply(model, data.readings) - data.forces
        return np.sqrt(np.mean(residual ** 2, axis=0))

    @staticmethod
    def split(data: Dataset, fraction: float, seed: Optional[int] = None) -> Tuple[CalibrationData, CalibrationData]:
        """Seeded shuffle, then the first `fraction` of samples for training."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"split fraction must be in (0, 1], got {fraction}")
        data = _as_data(data)
        order = np.random.default_rng(seed).permutation(len(data))
        n_train = int(round(fraction * len(data)))
        return data.subset(order[:n_train]), data.subset(order[n_train:])

    @staticmethod
    def evaluate(data: Dataset, fraction: float = 0.8, seed: Optional[int] = None) -> CalibrationReport:
        train, test = CalibrationService.split(data, fraction, seed)
        model = CalibrationService.fit(train)
        test_rms = CalibrationService.rms_error(model, test).tolist() if len(test) else [0.0, 0.0, 0.0]
        return CalibrationReport(model=model, n_test=len(test), train_rms=model.rms, test_rms=test_rms)

    @staticmethod
    def write_dataset(data: Dataset, stream: TextIO) -> None:
        data = _as_data(data)
        frame = pd.DataFrame(np.hstack([data.readings, data.forces]), columns=DATASET_COLUMNS)
        frame.to_csv(stream, index=False, lineterminator="\n")

    @staticmethod
    def read_dataset(stream: TextIO) -> CalibrationData:
        """Read `s1..s8,fx_n,fy_n,fz_n` rows; every cell must be a finite number."""
        text = stream.read()
        if not text.strip():
            raise EmptyDatasetError("empty calibration dataset")
        try:
            raw = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        except pd.errors.ParserError as e:
            raise DatasetSchemaError(f"malformed calibration CSV: {e}") from e
        if list(raw.columns) != DATASET_COLUMNS:
            raise DatasetSchemaError(f"expected header {','.join(DATASET_COLUMNS)}")

        values = np.empty(raw.shape, dtype=float)
        for j, column in enumerate(DATASET_COLUMNS):
            values[:, j] = [_to_float(v) for v in raw[column]]
            bad = np.nonzero(~np.isfinite(values[:, j]))[0]
            if bad.size:
                row = int(bad[0])
                # line 1 is the header
                raise DatasetRowError(
                    f"non-numeric or non-finite {column} value {raw[column].iloc[row]!r}", line=row + 2
                )
        return CalibrationData(values[:, :SENSOR_CHANNELS], values[:, SENSOR_CHANNELS:])

    @staticmethod
    def dump_model(model: CalibrationModel) -> str:
        return json.dumps({"c": model.c, "rms": model.rms, "n_train": model.n_train}, indent=2)

    @staticmethod
    def load_model(text: str) -> CalibrationModel:
        return CalibrationModel(**json.loads(text))
