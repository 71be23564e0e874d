import math
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, Field, field_validator

SENSOR_CHANNELS = 8
DATASET_COLUMNS = [f"s{i}" for i in range(1, SENSOR_CHANNELS + 1)] + ["fx_n", "fy_n", "fz_n"]


@dataclass(frozen=True)
class CalibrationData:
    """Paired samples: readings (N x 8 counts) and forces (N x 3, newtons)."""
    readings: np.ndarray
    forces: np.ndarray

    def __len__(self) -> int:
        return self.readings.shape[0]

    def subset(self, index: np.ndarray) -> "CalibrationData":
        return CalibrationData(self.readings[index], self.forces[index])


class CalibrationModel(BaseModel):
    c: List[List[float]]  # 3 x 9, last column is the bias
    rms: List[float]
    n_train: int = Field(ge=0)

    @field_validator("c")
    @classmethod
    def check_shape(cls, value):
        if len(value) != 3 or any(len(row) != SENSOR_CHANNELS + 1 for row in value):
            raise ValueError("calibration matrix must be 3 x 9")
        if not all(math.isfinite(x) for row in value for x in row):
            raise ValueError("calibration matrix must be finite")
        return value

    @field_validator("rms")
    @classmethod
    def check_rms(cls, value):
        if len(value) != 3 or any(x < 0 for x in value):
            raise ValueError("rms must hold three non-negative values")
        return value

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float)


class SensorForwardModel(BaseModel):
    """
    Linear shell model: displacement = compliance * force, each photointerrupter
    reads gain * (s_j . displacement) + offset. Four reflectors see z only, two
    are tilted by beta about y (x and z), two about x (y and z).
    """
    beta: float = Field(math.pi / 4, gt=0, lt=math.pi / 2)
    gain: List[float] = [2.0e6] * SENSOR_CHANNELS  # counts per metre
    offset: List[float] = [512.0] * SENSOR_CHANNELS  # counts
    compliance: List[float] = [1.0e-4, 1.0e-4, 1.0e-4]  # metres per newton
    noise_sigma: float = Field(5.0, ge=0)  # counts

    @field_validator("gain", "offset")
    @classmethod
    def check_channels(cls, value):
        if len(value) != SENSOR_CHANNELS:
            raise ValueError(f"expected {SENSOR_CHANNELS} values")
        return value

    @field_validator("compliance")
    @classmethod
    def check_compliance(cls, value):
        if len(value) != 3 or any(x <= 0 for x in value):
            raise ValueError("compliance needs three positive entries")
        return value

    @property
    def sensitivity(self) -> np.ndarray:
        s, c = math.sin(self.beta), math.cos(self.beta)
        return np.array([
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [s, 0.0, c],
            [-s, 0.0, c],
            [0.0, s, c],
            [0.0, -s, c],
        ])

    @property
    def jacobian(self) -> np.ndarray:
        """Readings per newton (8 x 3)."""
        return np.diag(self.gain) @ self.sensitivity @ np.diag(self.compliance)


class CalibrationReport(BaseModel):
    model: CalibrationModel
    n_test: int
    train_rms: List[float]
    test_rms: List[float]
