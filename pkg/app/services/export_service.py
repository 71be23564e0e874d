import json
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import pandas as pd

from app.core.logging import logger
from app.modules.metrics.schemas import BoxStats, PhaseProfile, StrideMetrics
from app.modules.simulator.schemas import ForceTrace

TRACE_COLUMNS = ["x_m", "t_s", "f_drag_n", "contact_count"]
BEAM_COLUMNS = ["x_m", "beam_index", "phi_rad", "delta_theta_rad", "fx_n", "fy_n", "saturated"]
STRIDE_COLUMNS = ["stride", "t_start_s", "t_end_s", "drag_energy_j", "electrical_energy_j", "specific_resistance"]
BOX_COLUMNS = ["metric", "count", "min", "q1", "median", "q3", "max"]
PHASE_COLUMNS = ["phase_rad", "drag_n", "lift_n", "samples"]

PathLike = Union[str, Path]


class ExportService:
    """Output files. Everything is written with `\\n` line endings and no index
    so identical inputs give byte-identical files."""

    @staticmethod
    def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
        logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    @staticmethod
    def trace_frame(trace: ForceTrace) -> pd.DataFrame:
        return pd.DataFrame(
            [(s.X_r, s.t, s.F_drag, s.contact_count) for s in trace.samples],
            columns=TRACE_COLUMNS,
        )

    @staticmethod
    def beam_frame(trace: ForceTrace) -> pd.DataFrame:
        rows = [
            (s.X_r, c.beam_index, c.phi, c.delta_theta, c.force.x, c.force.y, int(c.saturated))
            for s in trace.samples
            for c in s.contacts
        ]
        return pd.DataFrame(rows, columns=BEAM_COLUMNS)

    @staticmethod
    def write_trace(trace: ForceTrace, path: PathLike) -> Path:
        return ExportService._write_frame(ExportService.trace_frame(trace), path)

    @staticmethod
    def write_beams(trace: ForceTrace, path: PathLike) -> Path:
        return ExportService._write_frame(ExportService.beam_frame(trace), path)

    @staticmethod
    def write_strides(strides: Sequence[StrideMetrics], path: PathLike) -> Path:
        frame = pd.DataFrame(
            [
                (k, s.t_start, s.t_end, s.drag_energy, s.electrical_energy, s.specific_resistance)
                for k, s in enumerate(strides, start=1)
            ],
            columns=STRIDE_COLUMNS,
        )
        return ExportService._write_frame(frame, path)

    @staticmethod
    def write_box_stats(stats: Dict[str, BoxStats], path: PathLike) -> Path:
        frame = pd.DataFrame(
            [(name, b.count, b.minimum, b.q1, b.median, b.q3, b.maximum) for name, b in stats.items()],
            columns=BOX_COLUMNS,
        )
        return ExportService._write_frame(frame, path)

    @staticmethod
    def write_phase_profile(profile: PhaseProfile, path: PathLike) -> Path:
        frame = pd.DataFrame(
            list(zip(profile.phase, profile.drag, profile.lift, profile.counts)),
            columns=PHASE_COLUMNS,
        )
        return ExportService._write_frame(frame, path)

    @staticmethod
    def dumps(document: Any) -> str:
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def write_json(document: Any, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ExportService.dumps(document), encoding="utf-8")
        logger.debug(f"Wrote {path}")
        return path

    @staticmethod
    def write_text(text: str, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path
