from pathlib import Path
from typing import List, NamedTuple, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=select_autoescape(["svg", "j2"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


class Series(NamedTuple):
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _bounds(values: np.ndarray):
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-12:
        pad = max(abs(lo) * 0.1, 1.0e-3)
        return lo - pad, hi + pad
    return lo, hi


def _ticks(lo: float, hi: float, to_pixel, count: int = 5) -> List[dict]:
    return [
        {"pos": f"{to_pixel(v):.2f}", "label": f"{v:.4g}"}
        for v in np.linspace(lo, hi, count)
    ]


class PlotService:

    @staticmethod
    def line_plot(
        series: Sequence[Series],
        title: str,
        x_label: str,
        y_label: str,
        width: int = 640,
        height: int = 400,
    ) -> str:
        """
        Render one or more series as an SVG line chart. Coordinates are printed
        at fixed precision so the same data always gives the same document.
        """
        if not series:
            raise ValueError("line plot needs at least one series")
        xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series])
        ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series])
        if xs.size == 0:
            raise ValueError("line plot needs at least one point")

        left, right, top, bottom = 70, width - 20, 30, height - 45
        x0, x1 = _bounds(xs)
        y0, y1 = _bounds(ys)

        def px(v):
            return left + (v - x0) / (x1 - x0) * (right - left)

        def py(v):
            return bottom - (v - y0) / (y1 - y0) * (bottom - top)

        lines = []
        for k, s in enumerate(series):
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
            lines.append({"label": s.label, "color": COLORS[k % len(COLORS)], "points": points})

        return _env.get_template("line_plot.svg.j2").render(
            title=title,
            x_label=x_label,
            y_label=y_label,
            width=width,
            height=height,
            left=left,
            right=right,
            top=top,
            bottom=bottom,
            x_ticks=_ticks(x0, x1, px),
            y_ticks=_ticks(y0, y1, py),
            lines=lines,
        )
