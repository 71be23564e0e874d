import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import median_filter

from app.core.config import settings
from app.core.exceptions import EmptyWindowError, UndefinedMetricError
from app.core.logging import logger
from app.modules.metrics.schemas import BoxStats, PhaseProfile, StrideMetrics, TrialMetrics
from app.modules.telemetry.schemas import ChannelWindow
from app.modules.telemetry.services.telemetry_service import Records, TelemetryService

TWO_PI = 2.0 * math.pi
# samples either side of a stride boundary used for its line fit
FIT_HALF_WIDTH = 10


def _time_integral(t: np.ndarray, y: np.ndarray, t0: float, t1: float) -> float:
    """Trapezoidal integral of the piecewise-linear signal over [t0, t1]."""
    inner = (t > t0) & (t < t1)
    ts = np.concatenate(([t0], t[inner], [t1]))
    ys = np.concatenate(([np.interp(t0, t, y)], y[inner], [np.interp(t1, t, y)]))
    return float(trapezoid(ys, ts))


def _line_fit(t: np.ndarray, y: np.ndarray, lo: int, hi: int) -> Tuple[float, float]:
    """Least-squares slope and intercept of y(t) over samples lo:hi."""
    if hi - lo < 2:
        return 0.0, float(y[lo])
    slope, intercept = np.polyfit(t[lo:hi], y[lo:hi], 1)
    return float(slope), float(intercept)


class MetricsService:

    @staticmethod
    def drag_energy(mean_Fx: float, l_channel: float) -> float:
        if l_channel <= 0:
            raise ValueError(f"channel length must be positive, got {l_channel}")
        return mean_Fx * l_channel

    @staticmethod
    def specific_resistance(
        mean_power: float, mass: float, mean_velocity: float, g: Optional[float] = None
    ) -> float:
        """Dimensionless cost of transport P / (m g v)."""
        g = settings.gravity if g is None else g
        if mass <= 0:
            raise ValueError(f"mass must be positive, got {mass}")
        if mean_velocity <= 0:
            raise UndefinedMetricError(
                f"specific resistance undefined for mean velocity {mean_velocity} m/s (stalled trial)"
            )
        return mean_power / (mass * g * mean_velocity)

    @staticmethod
    def stride_segments(
        leg_angle: Sequence[float], time: Sequence[float], fit_half_width: int = FIT_HALF_WIDTH
    ) -> List[Tuple[float, float]]:
        """
        One segment per 2*pi advance of the unwrapped leg angle, starting at the
        first sample. The trailing partial stride is dropped.

        The starting angle and every boundary crossing come from a straight-line
        fit over the neighbouring `fit_half_width` samples on each side, so a
        single jittery sample moves neither the origin nor the boundaries.
        """
        angle = np.asarray(leg_angle, dtype=float)
        t = np.asarray(time, dtype=float)
        if len(angle) < 2 or len(t) < 2:
            return []
        if np.any(np.diff(t) <= 0):
            raise ValueError("stride segmentation needs strictly increasing time")

        unwrapped = np.unwrap(angle)
        smooth = unwrapped
        if len(unwrapped) >= 5:
            smooth = median_filter(unwrapped, size=5, mode="nearest")

        n = len(t)
        width = max(int(fit_half_width), 1)
        slope, intercept = _line_fit(t, unwrapped, 0, min(4 * width + 1, n))
        origin = intercept + slope * t[0] if slope > 0 else smooth[0]

        # running maximum so a noisy dip cannot move a boundary backwards
        advance = np.maximum.accumulate(smooth - origin)
        strides = int(math.floor(advance[-1] / TWO_PI + 1e-9))

        boundaries = [float(t[0])]
        for k in range(1, strides + 1):
            target = k * TWO_PI
            i = min(int(np.searchsorted(advance, target - 1e-12)), n - 1)
            lo, hi = max(i - width, 0), min(i + width + 1, n)
            slope, intercept = _line_fit(t, unwrapped, lo, hi)
            if slope > 0:
                crossing = (origin + target - intercept) / slope
            elif i == 0 or advance[i] == advance[i - 1]:
                crossing = t[i]
            else:
                frac = (target - advance[i - 1]) / (advance[i] - advance[i - 1])
                crossing = t[i - 1] + frac * (t[i] - t[i - 1])
            crossing = min(max(float(crossing), float(t[lo]), boundaries[-1]), float(t[hi - 1]))
            boundaries.append(crossing)
        return [(s0, s1) for s0, s1 in zip(boundaries[:-1], boundaries[1:]) if s1 > s0]

    @staticmethod
    def trial_metrics(
        records: Records,
        window: ChannelWindow,
        l_channel: float,
        mass: float,
        g: Optional[float] = None,
    ) -> TrialMetrics:
        frame = TelemetryService.to_frame(records)
        t = frame["t"].to_numpy()
        t0, t1 = window.t_enter, window.t_exit
        inside = (t >= t0) & (t <= t1)
        if t1 <= t0 or not inside.any():
            raise EmptyWindowError(f"no telemetry inside window {t0}-{t1} s")

        duration = t1 - t0
        drag = -frame["fx"].to_numpy()
        fz = frame["fz"].to_numpy()
        power = frame["power"].to_numpy()

        mean_Fx = _time_integral(t, drag, t0, t1) / duration
        mean_Fz = _time_integral(t, fz, t0, t1) / duration
        electrical_energy = _time_integral(t, power, t0, t1)
        mean_power = electrical_energy / duration
        mean_velocity = l_channel / duration

        per_stride = []
        segments = MetricsService.stride_segments(frame["leg_left"].to_numpy()[inside], t[inside])
        for s0, s1 in segments:
            stride_power = _time_integral(t, power, s0, s1)
            per_stride.append(
                StrideMetrics(
                    t_start=s0,
                    t_end=s1,
                    drag_energy=mean_velocity * _time_integral(t, drag, s0, s1),
                    electrical_energy=stride_power,
                    specific_resistance=MetricsService.specific_resistance(
                        stride_power / (s1 - s0), mass, mean_velocity, g
                    ),
                )
            )
        if not per_stride:
            logger.warning(f"No full stride inside window {t0:.3f}-{t1:.3f} s")

        metrics = TrialMetrics(
            t_enter=t0,
            t_exit=t1,
            mean_Fx=mean_Fx,
            mean_Fz=mean_Fz,
            mean_power=mean_power,
            mean_velocity=mean_velocity,
            drag_energy=MetricsService.drag_energy(mean_Fx, l_channel),
            electrical_energy=electrical_energy,
            specific_resistance=MetricsService.specific_resistance(mean_power, mass, mean_velocity, g),
            per_stride=per_stride,
        )
        logger.info(
            f"Trial: E_drag={metrics.drag_energy:.4f} J eta={metrics.specific_resistance:.2f} "
            f"strides={len(per_stride)}"
        )
        return metrics

    @staticmethod
    def leg_phase_profile(records: Records, window: ChannelWindow, bins: int = 12) -> PhaseProfile:
        """Mean drag (-fx) and lift (fz) per leg-phase bin inside the window."""
        frame = TelemetryService.to_frame(records)
        t = frame["t"].to_numpy()
        inside = (t >= window.t_enter) & (t <= window.t_exit)
        if not inside.any():
            raise EmptyWindowError("no telemetry inside window")
        phase = np.mod(frame["leg_left"].to_numpy()[inside], TWO_PI)
        index = np.minimum((phase / (TWO_PI / bins)).astype(int), bins - 1)
        counts = np.bincount(index, minlength=bins)
        drag = np.bincount(index, weights=-frame["fx"].to_numpy()[inside], minlength=bins)
        lift = np.bincount(index, weights=frame["fz"].to_numpy()[inside], minlength=bins)
        safe = np.maximum(counts, 1)
        return PhaseProfile(
            phase=list((np.arange(bins) + 0.5) * TWO_PI / bins),
            drag=list(drag / safe),
            lift=list(lift / safe),
            counts=[int(c) for c in counts],
        )

    @staticmethod
    def box_stats(values: Sequence[float]) -> BoxStats:
        data = np.asarray(values, dtype=float)
        if data.size == 0:
            raise ValueError("box statistics need at least one value")
        q = np.percentile(data, [0, 25, 50, 75, 100])
        return BoxStats(
            count=int(data.size), minimum=q[0], q1=q[1], median=q[2], q3=q[3], maximum=q[4]
        )
