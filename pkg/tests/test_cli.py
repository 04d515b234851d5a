from __future__ import annotations

import json

import numpy as np
import pytest

from marketaudit import (
    LagRegressor,
    PredictionSet,
    gen_trend_sine,
    movements,
    parse_price_csv,
    read_prediction_csv,
    rmse,
    write_prediction_csv,
)
from marketaudit.cli import render_report
from marketaudit.models import MOVEMENT, SCALED
from marketaudit.scaling import DivisorScaler


@pytest.fixture
def walk_csv(tmp_path, invoke):
    """Price CSV from the canonical seed-42 synth run."""
    path = tmp_path / "prices.csv"
    code, out, _ = invoke(
        "synth", "random-walk", "--seed", 42, "--n", 1000, "--sigma", 1.0,
        "--start", 100.0, "--out", path,
    )
    assert code == 0
    return path


@pytest.fixture
def lag_predictions_csv(tmp_path, walk_csv):
    """In-sample AR(3) predictions over the seed-42 walk."""
    series = parse_price_csv(walk_csv.read_text())
    ps = LagRegressor(order=3).fit(series).predict(series)
    path = tmp_path / "predictions.csv"
    path.write_text(write_prediction_csv(ps))
    return path


def test_synth_writes_and_prints_seed(tmp_path, invoke):
    out = tmp_path / "prices.csv"
    code, stdout, _ = invoke("synth", "random-walk", "--seed", 7, "--n", 25, "--out", out)
    assert code == 0
    assert "seed 7" in stdout
    assert len(parse_price_csv(out.read_text())) == 25


def test_synth_same_seed_same_bytes(tmp_path, invoke):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        code, _, _ = invoke("synth", "random-walk", "--seed", 3, "--n", 50, "--out", out)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_synth_bad_params_exit_1(tmp_path, invoke):
    code, _, stderr = invoke("synth", "random-walk", "--n", 0, "--out", tmp_path / "x.csv")
    assert code == 1
    assert "error" in stderr


def test_synth_trend_sine(tmp_path, invoke):
    out = tmp_path / "sine.csv"
    code, _, _ = invoke(
        "synth", "trend-sine", "--n", 41, "--amplitude", 5, "--period", 20, "--out", out
    )
    assert code == 0
    series = parse_price_csv(out.read_text())
    assert len(series) == 41
    assert series.closes.max() == pytest.approx(105.0, abs=1e-9)


def test_split_prints_partitions(tmp_path, invoke, walk_csv):
    ledger = tmp_path / "ledger.json"
    code, stdout, _ = invoke("split", "--prices", walk_csv, "--k", 4, "--ledger", ledger)
    assert code == 0
    lines = stdout.strip().split("\n")
    assert len(lines) == 4
    assert lines[0] == "partition 0: training rows [0, 250)"
    assert lines[-1] == "partition 3: evaluation rows [750, 1000)"
    assert ledger.exists()


def test_alter_increments(tmp_path, invoke, walk_csv):
    ledger = tmp_path / "ledger.json"
    invoke("split", "--prices", walk_csv, "--k", 3, "--ledger", ledger)
    code, stdout, _ = invoke("alter", "--ledger", ledger, "--note", "retuned")
    assert code == 0
    assert "alterations: 1" in stdout
    code, stdout, _ = invoke("alter", "--ledger", ledger, "--note", "again")
    assert "alterations: 2" in stdout


def test_next_unseen_sequence_then_exhaustion(tmp_path, invoke, walk_csv):
    ledger = tmp_path / "ledger.json"
    invoke("split", "--prices", walk_csv, "--k", 4, "--ledger", ledger)
    for expected in ("partition 1", "partition 2", "partition 3"):
        code, stdout, _ = invoke("next-unseen", "--ledger", ledger)
        assert code == 0
        assert expected in stdout
    code, _, stderr = invoke("next-unseen", "--ledger", ledger)
    assert code == 2
    assert "unseen" in stderr


def test_locked_ledger_exits_1(tmp_path, invoke, walk_csv):
    ledger = tmp_path / "ledger.json"
    invoke("split", "--prices", walk_csv, "--k", 3, "--ledger", ledger)
    (tmp_path / "ledger.json.lock").write_text("")
    code, _, stderr = invoke("alter", "--ledger", ledger, "--note", "x")
    assert code == 1
    assert "locked" in stderr


def test_audit_blocks_the_lag_trap(tmp_path, invoke, walk_csv, lag_predictions_csv):
    out_dir = tmp_path / "out"
    code, stdout, _ = invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-dir", out_dir,
    )
    assert code == 2
    # report.json is written even though the exit code is 2
    document = json.loads((out_dir / "report.json").read_text())
    mimicry = next(f for f in document["findings"] if f["check_id"] == "mimicry")
    assert mimicry["severity"] == "block"
    assert "BLOCK" in stdout
    assert (out_dir / "pred_vs_actual.csv").exists()
    assert (out_dir / "pred_vs_actual_zoom.csv").exists()
    assert (out_dir / "equity.csv").exists()
    # the simulated losses land in the report too
    assert document["simulation"]["total_return"] < 0


def test_audit_report_rmse_matches_plot_csv(tmp_path, invoke, walk_csv, lag_predictions_csv):
    out_dir = tmp_path / "out"
    invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-dir", out_dir,
    )
    document = json.loads((out_dir / "report.json").read_text())
    etf = next(f for f in document["findings"] if f["check_id"] == "error_to_fluctuation")
    plotted = read_prediction_csv((out_dir / "pred_vs_actual.csv").read_text())
    recomputed = rmse(plotted.predictions, plotted.targets)
    assert abs(recomputed - etf["metrics"]["rmse"]) < 1e-9


def test_audit_zoom_window(tmp_path, invoke, walk_csv, lag_predictions_csv):
    out_dir = tmp_path / "out"
    invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-dir", out_dir,
    )
    zoom_lines = (out_dir / "pred_vs_actual_zoom.csv").read_text().strip().split("\n")
    assert len(zoom_lines) == 51  # header + default last 50 points
    full = read_prediction_csv((out_dir / "pred_vs_actual.csv").read_text())
    zoomed = read_prediction_csv((out_dir / "pred_vs_actual_zoom.csv").read_text())
    assert np.array_equal(zoomed.targets, full.targets[-50:])

    narrow = tmp_path / "narrow"
    invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-dir", narrow, "--zoom", 10,
    )
    assert len((narrow / "pred_vs_actual_zoom.csv").read_text().strip().split("\n")) == 11


def test_audit_clean_run_exits_0(tmp_path, invoke):
    sine = gen_trend_sine(seed=0, n=60, amplitude=5.0, period=20)
    prices_path = tmp_path / "sine.csv"
    invoke(
        "synth", "trend-sine", "--seed", 0, "--n", 60, "--amplitude", 5, "--period", 20,
        "--out", prices_path,
    )
    scaler = DivisorScaler().fit(sine)
    scaled = scaler.transform(sine)
    ps = PredictionSet(
        targets=scaled[1:],
        predictions=scaled[1:],
        aligned_timestamps=sine.timestamps[1:],
        space=SCALED,
    )
    predictions_path = tmp_path / "good.csv"
    predictions_path.write_text(write_prediction_csv(ps))

    out_dir = tmp_path / "out"
    code, stdout, _ = invoke(
        "audit", "--predictions", predictions_path, "--prices", prices_path,
        "--space", "scaled", "--out-dir", out_dir,
    )
    assert code == 0
    assert "simulation: not run" in stdout  # scaled space cannot be traded
    assert not (out_dir / "equity.csv").exists()
    document = json.loads((out_dir / "report.json").read_text())
    assert document["simulation"] is None
    assert all(f["severity"] != "block" for f in document["findings"])


def test_audit_movement_space_trades_over_prices(tmp_path, invoke):
    sine = gen_trend_sine(seed=0, n=60, amplitude=5.0, period=20)
    prices_path = tmp_path / "sine.csv"
    invoke(
        "synth", "trend-sine", "--seed", 0, "--n", 60, "--amplitude", 5, "--period", 20,
        "--out", prices_path,
    )
    true_moves = movements(sine)
    ps = PredictionSet(
        targets=true_moves,
        predictions=true_moves,
        aligned_timestamps=sine.timestamps[1:],
        space=MOVEMENT,
    )
    predictions_path = tmp_path / "moves.csv"
    predictions_path.write_text(write_prediction_csv(ps))

    out_dir = tmp_path / "out"
    code, stdout, _ = invoke(
        "audit", "--predictions", predictions_path, "--prices", prices_path,
        "--space", "movement", "--out-dir", out_dir,
    )
    assert code == 0
    assert (out_dir / "equity.csv").exists()
    document = json.loads((out_dir / "report.json").read_text())
    da = next(f for f in document["findings"] if f["check_id"] == "directional_accuracy")
    assert da["metrics"]["directional_accuracy"] == 1.0
    range_check = next(f for f in document["findings"] if f["check_id"] == "range")
    assert range_check["message"].startswith("skipped:")


def test_audit_movement_space_misalignment_exits_1(tmp_path, invoke, walk_csv):
    ps = PredictionSet(
        targets=[1.0, -1.0], predictions=[1.0, -1.0],
        aligned_timestamps=("1", "2"), space=MOVEMENT,
    )
    predictions_path = tmp_path / "short.csv"
    predictions_path.write_text(write_prediction_csv(ps))
    code, _, stderr = invoke(
        "audit", "--predictions", predictions_path, "--prices", walk_csv,
        "--space", "movement", "--out-dir", tmp_path / "out",
    )
    assert code == 1
    assert "align" in stderr


def test_audit_with_ledger_and_mismatch(tmp_path, invoke, walk_csv, lag_predictions_csv):
    ledger = tmp_path / "ledger.json"
    invoke("split", "--prices", walk_csv, "--k", 3, "--ledger", ledger)
    out_dir = tmp_path / "out"
    code, _, _ = invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--ledger", ledger, "--out-dir", out_dir,
    )
    assert code == 2
    document = json.loads((out_dir / "report.json").read_text())
    sufficiency = next(f for f in document["findings"] if f["check_id"] == "sufficiency")
    assert sufficiency["metrics"] == {"required": 1, "available": 2, "consumed": 0}
    assert "ledger" in document["input_digests"]

    # a ledger built from different prices must not silently pass
    other = tmp_path / "other.csv"
    invoke("synth", "random-walk", "--seed", 9, "--n", 100, "--out", other)
    other_ledger = tmp_path / "other_ledger.json"
    invoke("split", "--prices", other, "--k", 3, "--ledger", other_ledger)
    code, _, stderr = invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--ledger", other_ledger, "--out-dir", tmp_path / "out2",
    )
    assert code == 1
    assert "different prices" in stderr


def test_audit_missing_file_exits_1(tmp_path, invoke, walk_csv):
    code, _, stderr = invoke(
        "audit", "--predictions", tmp_path / "absent.csv", "--prices", walk_csv,
        "--out-dir", tmp_path / "out",
    )
    assert code == 1
    assert "error" in stderr


def test_audit_config_override(tmp_path, invoke, walk_csv, lag_predictions_csv):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "thresholds": {"mimicry_block": 0.99, "etf_block": 5.0, "etf_warn": 4.0},
        "zoom": 5,
    }))
    out_dir = tmp_path / "out"
    code, _, _ = invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--config", config, "--out-dir", out_dir,
    )
    # only the range blocker is left once mimicry and etf are loosened
    assert code == 2
    document = json.loads((out_dir / "report.json").read_text())
    blockers = [f["check_id"] for f in document["findings"] if f["severity"] == "block"]
    assert blockers == ["range"]
    assert document["config_echo"]["thresholds"]["mimicry_block"] == 0.99
    assert document["config_echo"]["zoom"] == 5
    zoom_lines = (out_dir / "pred_vs_actual_zoom.csv").read_text().strip().split("\n")
    assert len(zoom_lines) == 6


def test_simulate_prints_metrics(tmp_path, invoke, walk_csv, lag_predictions_csv):
    equity_path = tmp_path / "equity.csv"
    code, stdout, _ = invoke(
        "simulate", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-equity", equity_path,
    )
    assert code == 0
    metrics = json.loads(stdout)
    assert set(metrics) == {
        "total_return", "hit_rate", "max_drawdown", "total_costs", "n_position_changes",
    }
    assert metrics["total_return"] < 0
    assert equity_path.read_text().startswith("timestamp,position,price,pnl,cost,equity")


def test_report_rerenders_existing_document(tmp_path, invoke, walk_csv, lag_predictions_csv):
    out_dir = tmp_path / "out"
    invoke(
        "audit", "--predictions", lag_predictions_csv, "--prices", walk_csv,
        "--out-dir", out_dir,
    )
    report_path = out_dir / "report.json"
    code, text_once, _ = invoke("report", "--report", report_path)
    assert code == 0
    assert "BLOCK" in text_once
    assert "§" in text_once
    code, text_again, _ = invoke("report", "--report", report_path)
    assert text_again == text_once
    code, as_json, _ = invoke("report", "--report", report_path, "--format", "json")
    assert json.loads(as_json) == json.loads(report_path.read_text())


def test_report_rejects_non_reports(tmp_path, invoke):
    junk = tmp_path / "junk.json"
    junk.write_text("{broken")
    assert invoke("report", "--report", junk)[0] == 1
    not_report = tmp_path / "other.json"
    not_report.write_text('{"hello": 1}')
    assert invoke("report", "--report", not_report)[0] == 1


def test_render_report_empty_findings():
    document = {"version": "0", "input_digests": {}, "config_echo": {}, "findings": [], "simulation": None}
    rendered = render_report(document, "json")
    assert json.loads(rendered)["findings"] == []
    assert render_report(document, "json") == rendered
    text = render_report(document, "text")
    assert "simulation: not run" in text


def test_render_report_hit_rate_absent():
    document = {
        "findings": [],
        "simulation": {
            "total_return": 0.0, "hit_rate": None, "max_drawdown": 0.0,
            "total_costs": 0.0, "n_position_changes": 0,
        },
    }
    assert "hit_rate absent" in render_report(document, "text")


def test_usage_errors_exit_1(invoke):
    assert invoke("synth", "random-walk")[0] == 1  # missing required --n/--out
    assert invoke("no-such-command")[0] == 1
    assert invoke("audit", "--predictions", "x", "--prices", "y", "--space", "log")[0] == 1


def test_version_and_help_exit_0(invoke):
    assert invoke("--version")[0] == 0
    assert invoke("--help")[0] == 0
