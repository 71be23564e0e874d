import io
import math
from typing import List, Sequence, TextIO, Union

import numpy as np
import pandas as pd

from app.core.exceptions import (
    EmptyWindowError,
    TelemetryOrderError,
    TelemetryRowError,
    TelemetrySchemaError,
)
from app.core.logging import logger
from app.modules.simulator.schemas import ForceTrace
from app.modules.telemetry.schemas import (
    RECORD_FIELDS,
    TELEMETRY_COLUMNS,
    ChannelWindow,
    SyntheticTrialSpec,
    TelemetryRecord,
)

Records = Union[Sequence[TelemetryRecord], pd.DataFrame]


def _to_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        return math.nan


class TelemetryService:

    @staticmethod
    def parse(stream: TextIO) -> List[TelemetryRecord]:
        """
        Read a telemetry CSV (header `t_s,fx_n,...,power_w`). Values go through
        float() so every field survives a serialize/parse round trip exactly.
        """
        text = stream.read()
        if not text.strip():
            raise TelemetrySchemaError("empty telemetry file: missing header")
        try:
            raw = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        except pd.errors.ParserError as e:
            raise TelemetrySchemaError(f"malformed telemetry CSV: {e}") from e

        if list(raw.columns) != TELEMETRY_COLUMNS:
            raise TelemetrySchemaError(
                f"expected header {','.join(TELEMETRY_COLUMNS)}, got {','.join(map(str, raw.columns))}"
            )

        columns = {}
        for column in TELEMETRY_COLUMNS:
            values = np.array([_to_float(v) for v in raw[column]], dtype=float)
            bad = np.nonzero(~np.isfinite(values))[0]
            if bad.size:
                row = int(bad[0])
                # line 1 is the header
                raise TelemetryRowError(
                    f"non-numeric or non-finite {column} value {raw[column].iloc[row]!r}", line=row + 2
                )
            columns[column] = values

        t = columns["t_s"]
        decreasing = np.nonzero(np.diff(t) < 0)[0]
        if decreasing.size:
            row = int(decreasing[0]) + 1
            raise TelemetryOrderError(f"timestamp {t[row]} precedes {t[row - 1]}", line=row + 2)

        records = [
            TelemetryRecord(**{field: float(columns[column][k]) for field, column in zip(RECORD_FIELDS, TELEMETRY_COLUMNS)})
            for k in range(len(t))
        ]
        logger.debug(f"Parsed {len(records)} telemetry rows")
        return records

    @staticmethod
    def serialize(records: Records, stream: TextIO) -> None:
        frame = TelemetryService.to_frame(records)
        frame.columns = TELEMETRY_COLUMNS
        frame.to_csv(stream, index=False, lineterminator="\n")

    @staticmethod
    def to_frame(records: Records) -> pd.DataFrame:
        if isinstance(records, pd.DataFrame):
            return records.copy()
        return pd.DataFrame([r.model_dump() for r in records], columns=RECORD_FIELDS)

    @staticmethod
    def detect_window(
        records: Records,
        threshold: float = 0.05,
        hysteresis: float = 0.02,
        min_duration: float = 0.25,
    ) -> ChannelWindow:
        """
        Channel entry/exit from the drag channel |fx|. A run starts when the drag
        rises above `threshold` and ends when it falls below threshold - hysteresis;
        only runs lasting at least `min_duration` count.
        """
        frame = TelemetryService.to_frame(records)
        if len(frame) < 2:
            raise EmptyWindowError("window detection needs at least two records")
        t = frame["t"].to_numpy()
        drag = np.abs(frame["fx"].to_numpy())
        release = threshold - hysteresis

        runs = []
        start = None
        for i, value in enumerate(drag):
            if start is None and value > threshold:
                start = i
            elif start is not None and value < release:
                runs.append((start, i - 1))
                start = None
        if start is not None:
            runs.append((start, len(drag) - 1))

        sustained = [(a, b) for a, b in runs if t[b] - t[a] >= min_duration]
        if not sustained:
            logger.warning("No sustained drag crossing: treating trace as a free run")
            return ChannelWindow(t_enter=float(t[0]), t_exit=float(t[-1]), free_run=True)

        window = ChannelWindow(t_enter=float(t[sustained[0][0]]), t_exit=float(t[sustained[-1][1]]))
        logger.info(f"Channel window {window.t_enter:.3f}-{window.t_exit:.3f} s")
        return window

    @staticmethod
    def synth_trial(trace: ForceTrace, spec: SyntheticTrialSpec = SyntheticTrialSpec()) -> List[TelemetryRecord]:
        """
        Synthetic trial: free running, then the simulated drag trace replayed at
        `spec.speed` with stride-periodic ripple, then free running again.
        """
        X = np.array([s.X_r for s in trace.samples])
        drag_trace = np.array([s.F_drag for s in trace.samples])
        if trace.direction == -1:
            X, drag_trace = X[::-1], drag_trace[::-1]
        transit = (X[-1] - X[0]) / spec.speed
        duration = spec.lead_in + transit + spec.lead_out
        n = int(math.floor(duration * spec.rate_hz)) + 1
        t = np.arange(n) / spec.rate_hz

        position = X[0] + spec.speed * (t - spec.lead_in)
        inside = (t >= spec.lead_in) & (t <= spec.lead_in + transit)
        drag = np.where(inside, np.interp(position, X, drag_trace), 0.0)

        rng = np.random.default_rng(spec.seed)
        noise = rng.normal(0.0, 1.0, size=(n, 3)) * np.asarray(spec.noise)
        phase = 2.0 * math.pi * spec.stride_hz * t

        frame = pd.DataFrame({
            "t": t,
            "fx": -drag * (1.0 + spec.oscillation * np.sin(phase)) + noise[:, 0],
            "fy": noise[:, 1],
            "fz": -spec.lift_ratio * drag + noise[:, 2],
            "leg_left": np.mod(phase, 2.0 * math.pi),
            "leg_right": np.mod(phase + math.pi, 2.0 * math.pi),
            "power": spec.power + spec.power_ripple * np.sin(2.0 * phase),
        })
        logger.info(f"Synthesised {n} telemetry rows ({duration:.2f} s)")
        return [TelemetryRecord(**row) for row in frame.to_dict(orient="records")]
