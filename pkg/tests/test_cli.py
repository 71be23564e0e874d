import json

import pandas as pd
import pytest

from app.cli.config import load_config, preset_overrides
from app.cli.main import build_parser, main
from app.core.config import settings
from app.core.exceptions import ConfigError
from app.modules.simulator.schemas import Preset


def read_json(path):
    return json.loads(path.read_text())


def test_load_config_defaults():
    config = load_config()
    channel = config.channel_spec()
    assert config.channel.deflection == 0.03
    assert channel.b == pytest.approx(0.04)
    assert config.sweep.dx == 1e-3


def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("CHANNEL__N=7\nSWEEP__DX=0.002\nBODY__MASS=0.1\n")
    config = load_config(str(path), {"sweep": {"dx": 0.005}})
    assert config.channel.n == 7
    assert config.body.mass == 0.1
    assert config.sweep.dx == 0.005


def test_load_config_width_or_deflection(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("CHANNEL__WIDTH=0.06\n")
    assert load_config(str(path)).channel_spec().b == pytest.approx(0.06)

    path.write_text("CHANNEL__WIDTH=0.06\nCHANNEL__DEFLECTION=0.03\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_load_config_preset_free():
    config = load_config(overrides=preset_overrides(Preset.free))
    assert config.channel_spec().free


def test_load_config_names_offending_key(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("CHANNEL__N=0\n")
    with pytest.raises(ConfigError) as info:
        load_config(str(path))
    assert info.value.key == "channel.n"


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.env"))


def test_presets_command(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "d3\tdeflection=0.030 m\twidth=0.040 m" in out
    assert "free" in out


def test_simulate_free_preset(tmp_path):
    assert main(["simulate", "--preset", "free", "--out", str(tmp_path), "--dx", "0.005"]) == 0
    summary = read_json(tmp_path / "summary.json")
    assert summary["summary"]["plateau_mean_drag"] == 0.0
    trace = pd.read_csv(tmp_path / "trace.csv")
    assert list(trace.columns) == ["x_m", "t_s", "f_drag_n", "contact_count"]
    assert (tmp_path / "drag.svg").read_text().startswith("<svg")


def test_simulate_is_deterministic(tmp_path):
    args = ["simulate", "--preset", "d2", "--dx", "0.002"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("trace.csv", "beams.csv", "summary.json", "drag.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    beams = pd.read_csv(tmp_path / "a" / "beams.csv")
    assert list(beams.columns) == ["x_m", "beam_index", "phi_rad", "delta_theta_rad", "fx_n", "fy_n", "saturated"]
    summary = read_json(tmp_path / "a" / "summary.json")["summary"]
    assert summary["plateau_contact_counts"] == [5, 6]


def test_simulate_format_selection(tmp_path):
    assert main(["simulate", "--preset", "d1", "--dx", "0.005", "--out", str(tmp_path), "--format", "json"]) == 0
    assert (tmp_path / "summary.json").exists()
    assert not (tmp_path / "trace.csv").exists()
    assert not (tmp_path / "drag.svg").exists()


def test_simulate_bad_config_exits_with_key(tmp_path, capsys):
    path = tmp_path / "bad.env"
    path.write_text("CHANNEL__N=0\n")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error: config: channel.n")


def test_batch_writes_runs_and_summary(tmp_path):
    assert main(["batch", "--dx", "0.002", "--out", str(tmp_path)]) == 0
    summary = read_json(tmp_path / "batch_summary.json")
    means = [summary["runs"][p]["plateau_mean_drag"] for p in ("d1", "d2", "d3")]
    assert means[0] < means[1] < means[2]
    for preset in ("d1", "d2", "d3"):
        assert (tmp_path / preset / "trace.csv").exists()
    assert (tmp_path / "drag_overlay.svg").exists()


def test_synth_telemetry_then_analyze(tmp_path):
    telemetry = tmp_path / "trial.csv"
    assert main(["synth-telemetry", str(telemetry), "--preset", "d2", "--dx", "0.002", "--seed", "3"]) == 0
    out = tmp_path / "analysis"
    assert main(["analyze", str(telemetry), "--out", str(out)]) == 0

    metrics = read_json(out / "metrics.json")
    assert metrics["drag_energy_j"] > 0
    assert metrics["specific_resistance"] > 0
    assert not metrics["window"]["free_run"]
    strides = pd.read_csv(out / "strides.csv")
    assert len(strides) == len(metrics["strides"])
    assert (out / "phase_profile.csv").exists()
    assert (out / "forces.svg").exists()


def test_analyze_reports_file_and_line(tmp_path, capsys):
    telemetry = tmp_path / "broken.csv"
    telemetry.write_text("t_s,fx_n,fy_n,fz_n,leg_left_rad,leg_right_rad,power_w\n0,0,0,0,0,0,1\n0.1,x,0,0,0,0,1\n")
    assert main(["analyze", str(telemetry), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error: telemetry_row:")
    assert "broken.csv" in err
    assert "line 3" in err


def test_synth_calibration_then_calibrate(tmp_path):
    data = tmp_path / "calibration.csv"
    assert main(["synth-calibration", str(data), "--rows", "100", "--noise", "0", "--seed", "2"]) == 0
    out = tmp_path / "fit"
    assert main(["calibrate", str(data), "--out", str(out), "--split", "0.75"]) == 0
    report = read_json(out / "report.json")
    assert report["n_train"] == 75
    assert max(report["test_rms_n"]) < 1e-9
    model = read_json(out / "model.json")
    assert len(model["c"]) == 3


def test_calibrate_too_few_rows_fails(tmp_path, capsys):
    data = tmp_path / "small.csv"
    assert main(["synth-calibration", str(data), "--rows", "8"]) == 0
    assert main(["calibrate", str(data), "--out", str(tmp_path), "--split", "1.0"]) == 2
    assert "error: degenerate_excitation:" in capsys.readouterr().err


def test_batch_workers_default_to_settings():
    args = build_parser().parse_args(["batch"])
    assert args.workers == settings.max_workers


def test_simulate_stagger_requires_two_sided(tmp_path, capsys):
    args = ["simulate", "--preset", "d2", "--dx", "0.005", "--stagger", "0.01", "--out", str(tmp_path)]
    assert main(args) == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error: config: channel.stagger")

    assert main(args + ["--two-sided"]) == 0
    document = read_json(tmp_path / "summary.json")
    assert document["channel"]["stagger"] == 0.01
    assert document["sweep"]["two_sided"] is True


def test_analyze_non_utf8_file_exits_with_schema_error(tmp_path, capsys):
    telemetry = tmp_path / "binary.csv"
    telemetry.write_bytes(b"t_s,fx_n\n\xff\xfe\x00\n")
    assert main(["analyze", str(telemetry), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error: telemetry_schema:")
    assert "binary.csv" in err


def test_simulate_trace_has_no_negative_zero(tmp_path):
    assert main(["simulate", "--preset", "d1", "--dx", "0.005", "--out", str(tmp_path)]) == 0
    rows = [line.split(",") for line in (tmp_path / "trace.csv").read_text().splitlines()[1:]]
    empty = [row for row in rows if row[3] == "0"]
    assert empty
    assert all(row[2] == "0.0" for row in empty)
