import argparse
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from app.cli.config import OUTPUT_FORMATS, RunConfig, merge_overrides, load_config, preset_overrides
from app.core.config import settings
from app.core.exceptions import ConfigError, DatasetSchemaError, ShellDragError, TelemetrySchemaError
from app.core.logging import logger
from app.modules.calibration.schemas import SensorForwardModel
from app.modules.calibration.services.calibration_service import CalibrationService
from app.modules.metrics.services.metrics_service import MetricsService
from app.modules.simulator.schemas import PRESET_DEFLECTIONS, ForceTrace, Preset, TraceSummary
from app.modules.simulator.services.simulator_service import SimulatorService
from app.modules.telemetry.schemas import SyntheticTrialSpec
from app.modules.telemetry.services.telemetry_service import TelemetryService
from app.services.export_service import ExportService
from app.services.plot_service import PlotService, Series

PRESET_NAMES = [p.value for p in Preset]
DEFAULT_BATCH = ["d1", "d2", "d3"]


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values that replace config-file values."""
    overrides: Dict[str, Any] = {}
    if getattr(args, "preset", None):
        overrides = merge_overrides(overrides, preset_overrides(Preset(args.preset)))
    if getattr(args, "dx", None) is not None:
        overrides = merge_overrides(overrides, {"sweep": {"dx": args.dx}})
    if getattr(args, "spacing", None) is not None:
        overrides = merge_overrides(overrides, {"channel": {"spacing_override": args.spacing}})
    if getattr(args, "stagger", None) is not None:
        overrides = merge_overrides(overrides, {"channel": {"stagger": args.stagger}})
    if getattr(args, "out", None):
        overrides = merge_overrides(overrides, {"output": {"directory": args.out}})
    if getattr(args, "format", None):
        overrides = merge_overrides(overrides, {"output": {"formats": args.format}})
    return overrides


def _run_document(label: str, config: RunConfig, trace: ForceTrace, summary: TraceSummary) -> Dict[str, Any]:
    return {
        "run": label,
        "channel": config.channel_spec().model_dump(mode="json"),
        "body": config.ellipse().model_dump(mode="json"),
        "sweep": {"dx": trace.dx, "v": trace.v, "two_sided": trace.two_sided},
        "summary": summary.model_dump(mode="json"),
    }


def _write_run(
    out: Path, label: str, config: RunConfig, trace: ForceTrace, summary: TraceSummary
) -> None:
    formats = config.output.formats
    if "csv" in formats:
        ExportService.write_trace(trace, out / "trace.csv")
        ExportService.write_beams(trace, out / "beams.csv")
    if "json" in formats:
        ExportService.write_json(_run_document(label, config, trace, summary), out / "summary.json")
    if "svg" in formats:
        svg = PlotService.line_plot(
            [Series(label, [s.X_r for s in trace.samples], [s.F_drag for s in trace.samples])],
            title=f"Simulated drag ({label})",
            x_label="body position X_r (m)",
            y_label="drag force (N)",
        )
        ExportService.write_text(svg, out / "drag.svg")


def _label(preset: Optional[str], config: RunConfig) -> str:
    if preset:
        return preset
    c = config.channel
    if c.free:
        return "free"
    if c.width is not None:
        return f"b={c.width:g}"
    return f"d={c.deflection:g}"


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    body = config.ellipse()
    channel = config.channel_spec()
    if channel.stagger != 0.0 and not args.two_sided:
        raise ConfigError("a staggered bottom row needs --two-sided", key="channel.stagger")
    trace = SimulatorService.sweep(
        channel, body, config.sweep.dx, config.sweep.v, two_sided=args.two_sided
    )
    summary = SimulatorService.summarize(trace, channel, body)
    label = _label(args.preset, config)
    out = Path(config.output.directory)
    _write_run(out, label, config, trace, summary)
    logger.info(
        f"simulate {label}: plateau drag {summary.plateau_mean_drag:.4f} N, "
        f"contacts {summary.plateau_contact_counts}, output {out}"
    )
    return 0


def cmd_batch(args: argparse.Namespace) -> int:
    common = _overrides(args)
    configs = [load_config(args.config, merge_overrides(common, preset_overrides(Preset(p)))) for p in args.presets]
    if any(c.channel.stagger != 0.0 for c in configs):
        raise ConfigError("batch runs are one-sided; staggered rows need simulate --two-sided", key="channel.stagger")
    out = Path(configs[0].output.directory)
    body = configs[0].ellipse()
    sweep = configs[0].sweep
    results = SimulatorService.run_batch(
        [c.channel_spec() for c in configs], body, sweep.dx, sweep.v, max_workers=args.workers
    )

    documents = {}
    overlay = []
    for preset, config, (trace, summary) in zip(args.presets, configs, results):
        _write_run(out / preset, preset, config, trace, summary)
        documents[preset] = summary.model_dump(mode="json")
        overlay.append(Series(preset, [s.X_r for s in trace.samples], [s.F_drag for s in trace.samples]))

    formats = configs[0].output.formats
    if "json" in formats:
        ExportService.write_json({"runs": documents, "dx": sweep.dx, "v": sweep.v}, out / "batch_summary.json")
    if "svg" in formats:
        svg = PlotService.line_plot(
            overlay, "Simulated drag by channel", "body position X_r (m)", "drag force (N)"
        )
        ExportService.write_text(svg, out / "drag_overlay.svg")
    logger.info(f"batch: {len(results)} runs written to {out}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    analysis = config.analysis
    try:
        with open(args.telemetry, encoding="utf-8") as stream:
            records = TelemetryService.parse(stream)
        window = TelemetryService.detect_window(
            records, analysis.threshold, analysis.hysteresis, analysis.min_duration
        )
        metrics = MetricsService.trial_metrics(
            records, window, config.channel.l_channel, config.body.mass, analysis.g
        )
        profile = MetricsService.leg_phase_profile(records, window, analysis.phase_bins)
    except ShellDragError as e:
        raise e.with_source(args.telemetry)
    except UnicodeDecodeError as e:
        raise TelemetrySchemaError(f"telemetry file is not UTF-8 text: {e.reason}").with_source(args.telemetry) from e

    stats = {}
    if metrics.per_stride:
        for name in ("drag_energy", "electrical_energy", "specific_resistance"):
            stats[name] = MetricsService.box_stats([getattr(s, name) for s in metrics.per_stride])

    out = Path(config.output.directory)
    formats = config.output.formats
    if "json" in formats:
        document = metrics.to_summary()
        document["window"] = window.model_dump()
        document["box_stats"] = {name: b.model_dump() for name, b in stats.items()}
        ExportService.write_json(document, out / "metrics.json")
    if "csv" in formats:
        ExportService.write_strides(metrics.per_stride, out / "strides.csv")
        ExportService.write_box_stats(stats, out / "box_stats.csv")
        ExportService.write_phase_profile(profile, out / "phase_profile.csv")
    if "svg" in formats:
        t = [r.t for r in records]
        svg = PlotService.line_plot(
            [Series("drag -Fx", t, [-r.fx for r in records]), Series("lift Fz", t, [r.fz for r in records])],
            title="Measured forces",
            x_label="time (s)",
            y_label="force (N)",
        )
        ExportService.write_text(svg, out / "forces.svg")
    logger.info(
        f"analyze {args.telemetry}: E_drag {metrics.drag_energy:.4f} J, "
        f"eta {metrics.specific_resistance:.2f}, {len(metrics.per_stride)} strides"
    )
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    try:
        with open(args.dataset, encoding="utf-8") as stream:
            data = CalibrationService.read_dataset(stream)
        report = CalibrationService.evaluate(data, args.split, args.seed)
    except ShellDragError as e:
        raise e.with_source(args.dataset)
    except UnicodeDecodeError as e:
        raise DatasetSchemaError(f"calibration file is not UTF-8 text: {e.reason}").with_source(args.dataset) from e

    out = Path(config.output.directory)
    ExportService.write_text(CalibrationService.dump_model(report.model) + "\n", out / "model.json")
    ExportService.write_json(
        {
            "n_train": report.model.n_train,
            "n_test": report.n_test,
            "split": args.split,
            "seed": args.seed,
            "train_rms_n": report.train_rms,
            "test_rms_n": report.test_rms,
        },
        out / "report.json",
    )
    logger.info(f"calibrate {args.dataset}: test rms {np.round(report.test_rms, 4).tolist()} N")
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    body = config.ellipse()
    for preset in Preset:
        d = PRESET_DEFLECTIONS[preset]
        if d is None:
            print(f"{preset.value}\tfree run (no beams)")
        else:
            print(f"{preset.value}\tdeflection={d:.3f} m\twidth={2.0 * body.R_y - 2.0 * d:.3f} m")
    return 0


def cmd_synth_telemetry(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    body = config.ellipse()
    channel = config.channel_spec()
    trace = SimulatorService.sweep(channel, body, config.sweep.dx, config.sweep.v)
    records = TelemetryService.synth_trial(trace, SyntheticTrialSpec(speed=config.sweep.v, seed=args.seed))
    path = Path(args.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as stream:
        TelemetryService.serialize(records, stream)
    logger.info(f"synth-telemetry: {len(records)} rows written to {path}")
    return 0


def cmd_synth_calibration(args: argparse.Namespace) -> int:
    model = SensorForwardModel(noise_sigma=args.noise)
    forces = CalibrationService.random_forces(args.rows, args.scale, args.seed)
    data = CalibrationService.synth_dataset(model, forces, args.seed + 1)
    path = Path(args.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as stream:
        CalibrationService.write_dataset(data, stream)
    logger.info(f"synth-calibration: {args.rows} rows written to {path}")
    return 0


def _add_common(parser: argparse.ArgumentParser, outputs: bool = True) -> None:
    parser.add_argument("--config", help="run configuration file (KEY=VALUE, sections joined by __)")
    if outputs:
        parser.add_argument("--out", help="output directory")
        parser.add_argument(
            "--format", action="append", choices=OUTPUT_FORMATS, help="output format (repeatable)"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shelldrag", description="Shell drag in beam-lined channels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sweep the body through one channel")
    _add_common(p)
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--dx", type=float, help="sweep step (m)")
    p.add_argument("--spacing", type=float, help="beam spacing override (m)")
    p.add_argument("--stagger", type=float, help="bottom-row shift along the channel (m); needs --two-sided")
    p.add_argument("--two-sided", action="store_true", help="solve both beam rows explicitly")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("batch", help="simulate several presets")
    _add_common(p)
    p.add_argument("--presets", nargs="+", choices=PRESET_NAMES, default=DEFAULT_BATCH)
    p.add_argument("--dx", type=float, help="sweep step (m)")
    p.add_argument("--spacing", type=float, help="beam spacing override (m)")
    p.add_argument("--workers", type=int, default=settings.max_workers)
    p.set_defaults(handler=cmd_batch)

    p = sub.add_parser("analyze", help="trial metrics from a telemetry CSV")
    _add_common(p)
    p.add_argument("telemetry")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("calibrate", help="fit the sensor calibration matrix")
    _add_common(p)
    p.add_argument("dataset")
    p.add_argument("--split", type=float, default=0.8, help="training fraction")
    p.add_argument("--seed", type=int, default=settings.seed)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("presets", help="list the channel presets")
    _add_common(p, outputs=False)
    p.set_defaults(handler=cmd_presets)

    p = sub.add_parser("synth-telemetry", help="write a synthetic trial CSV")
    _add_common(p, outputs=False)
    p.add_argument("output")
    p.add_argument("--preset", choices=PRESET_NAMES, default="d3")
    p.add_argument("--dx", type=float, help="sweep step (m)")
    p.add_argument("--seed", type=int, default=settings.seed)
    p.set_defaults(handler=cmd_synth_telemetry)

    p = sub.add_parser("synth-calibration", help="write a synthetic calibration dataset")
    p.add_argument("output")
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--scale", type=float, default=1.0, help="excitation force scale (N)")
    p.add_argument("--noise", type=float, default=5.0, help="reading noise sigma (counts)")
    p.add_argument("--seed", type=int, default=settings.seed)
    p.set_defaults(handler=cmd_synth_calibration)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ShellDragError as e:
        message = " ".join(e.message.split())
        print(f"error: {e.code}: {message}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"{args.command} failed")
        print(f"error: internal: {' '.join(str(e).split())}", file=sys.stderr)
        return 1
