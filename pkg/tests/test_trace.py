import csv
import math
from dataclasses import fields
from pathlib import Path

import pytest

import aebsim
from aebsim.command import ControllerMode
from aebsim.trace import (
    PLOT_SERIES,
    TRACE_FIELDS,
    format_comparison,
    format_metrics,
    format_value,
    merge_intervals,
    mode_intervals,
    steady_emergency_ticks,
    write_metrics,
    write_plot_csv,
    write_trace_csv,
)

WSC = ControllerMode.WheelSlipControl
SR = ControllerMode.SpeedRegulation


def record(t: float, mode: ControllerMode = WSC, **overrides: float) -> aebsim.TraceRecord:
    values: dict[str, object] = dict.fromkeys(TRACE_FIELDS, 0.0)
    values |= {"t": t, "mode": mode, "v": 10.0, "delta_x": 5.0}
    values |= overrides
    return aebsim.TraceRecord(**values)  # type: ignore[arg-type]


def ticks(modes: str, dt: float = 1.0, **overrides: float) -> list[aebsim.TraceRecord]:
    """One record per character: ``W`` for wheel-slip control, ``S`` for speed regulation."""
    return [record(k * dt, WSC if m == "W" else SR, **overrides) for k, m in enumerate(modes)]


# --- metrics ---


def test_constant_gap() -> None:
    metrics = aebsim.compute_metrics(ticks("SSSS"))
    assert metrics.min_gap == metrics.final_gap == 5.0
    assert not metrics.collision
    assert metrics.stop_time_ego is None


def test_collision_is_recorded() -> None:
    trace = [record(float(k), SR, delta_x=gap) for k, gap in enumerate((5.0, 0.0, -1.0, 2.0))]
    metrics = aebsim.compute_metrics(trace)
    assert metrics.min_gap == -1.0
    assert metrics.final_gap == 2.0
    assert metrics.collision


def test_touching_counts_as_collision() -> None:
    assert aebsim.compute_metrics([record(0.0, SR, delta_x=0.0)]).collision


def test_stop_time_is_first_tick_below_standstill_speed() -> None:
    trace = [record(0.1 * k, v=v) for k, v in enumerate((3.0, 1.0, 0.05, 0.0))]
    assert aebsim.compute_metrics(trace).stop_time_ego == pytest.approx(0.2)


def test_mode_intervals() -> None:
    trace = ticks("SSWWSW")
    assert mode_intervals(trace, WSC) == ((2.0, 4.0), (5.0, 5.0))
    assert mode_intervals(trace, SR) == ((0.0, 2.0), (4.0, 5.0))
    assert mode_intervals(trace, ControllerMode.Standstill) == ()


def test_first_emergency_end() -> None:
    assert aebsim.compute_metrics(ticks("SWWSW")).first_emergency_end == 3.0
    assert aebsim.compute_metrics(ticks("SS")).first_emergency_end is None


def test_merge_intervals() -> None:
    intervals = ((0.0, 1.0), (1.02, 2.0), (2.5, 3.0), (3.01, 3.5))
    assert merge_intervals(intervals, 0.05) == ((0.0, 2.0), (2.5, 3.5))
    assert merge_intervals(intervals, 0.0) == intervals
    assert merge_intervals((), 0.05) == ()


def test_short_regulation_blips_join_emergency_intervals() -> None:
    trace = ticks("WWWSSSSWSWSWWW", dt=0.25)
    metrics = aebsim.compute_metrics(trace, transient_window=0.5)
    assert metrics.emergency_intervals == ((0.0, 0.75), (1.75, 3.25))
    assert metrics.regulation_intervals == ((0.75, 1.75),)
    assert metrics.first_emergency_end == 0.75


def test_blips_still_restart_the_slip_transient() -> None:
    trace = ticks("WWWWSWWWW", dt=0.25, lambda_f=0.2, lambda_ref_f=0.1)
    trace[5] = record(1.25, lambda_f=0.1, lambda_ref_f=0.1)
    metrics = aebsim.compute_metrics(trace, transient_window=0.5)
    assert len(metrics.emergency_intervals) == 1
    assert metrics.slip_rel_error_mean_f == pytest.approx(1.0)


def test_steady_ticks_skip_each_activation_transient() -> None:
    trace = ticks("WWWWSWWWWW", dt=0.25)
    steady = steady_emergency_ticks(trace, 0.5)
    assert [r.t for r in steady] == [0.75, 2.0, 2.25]


def test_slip_error_is_nan_without_steady_ticks() -> None:
    metrics = aebsim.compute_metrics(ticks("SSSS"))
    assert math.isnan(metrics.slip_rel_error_mean_f)
    assert math.isnan(metrics.slip_rel_error_mean_r)
    assert metrics.peak_deceleration == 0.0


def test_slip_error_and_peak_deceleration() -> None:
    trace = ticks("W" * 10, dt=0.01, lambda_f=0.11, lambda_ref_f=0.1, lambda_r=0.1)
    trace[-1] = record(0.09, lambda_f=0.11, lambda_ref_f=0.1, lambda_r=0.1, body_accel=-8.5)
    metrics = aebsim.compute_metrics(trace)
    assert metrics.slip_rel_error_mean_f == pytest.approx(0.1)
    assert math.isnan(metrics.slip_rel_error_mean_r)
    assert metrics.peak_deceleration == 8.5


def test_transient_window_is_configurable() -> None:
    trace = ticks("W" * 6, dt=0.25, lambda_f=0.2, lambda_ref_f=0.1)
    trace[1] = record(0.25, lambda_f=0.1, lambda_ref_f=0.1)
    assert aebsim.compute_metrics(trace, 0.5).slip_rel_error_mean_f == pytest.approx(1.0)
    assert aebsim.compute_metrics(trace, 0.0).slip_rel_error_mean_f == pytest.approx(0.8)


def test_empty_trace() -> None:
    with pytest.raises(ValueError, match="empty trace"):
        aebsim.compute_metrics([])


# --- text outputs ---


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        (0.1, "0.1"),
        (1 / 3, "0.333333333"),
        (-8.829000000001, "-8.829"),
        (1e-12, "1e-12"),
        (math.nan, "nan"),
        (True, "true"),
        (None, "none"),
        (((0.0, 0.5), (1.25, 2.0)), "[[0, 0.5], [1.25, 2]]"),
        (ControllerMode.Standstill, "Standstill"),
        (3, "3"),
    ],
)
def test_format_value(value: object, expected: str) -> None:
    assert format_value(value) == expected


def test_write_trace_csv(tmp_path: Path) -> None:
    path = tmp_path / "run.trace.csv"
    write_trace_csv(ticks("SWW", dt=0.001), path)
    with path.open(newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == TRACE_FIELDS
    assert len(rows) == 4
    assert rows[2][TRACE_FIELDS.index("t")] == "0.001"
    assert rows[1][TRACE_FIELDS.index("mode")] == "SpeedRegulation"


def test_write_plot_csv_single_run(tmp_path: Path) -> None:
    path = tmp_path / "run.plot.csv"
    write_plot_csv({"smc": ticks("WW")}, path)
    with path.open(newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "series", "value"]
    assert len(rows) == 1 + 2 * len(PLOT_SERIES)
    assert {row[1] for row in rows[1:]} == set(PLOT_SERIES)


def test_write_plot_csv_prefixes_series_of_several_runs(tmp_path: Path) -> None:
    path = tmp_path / "compare.plot.csv"
    write_plot_csv({"smc": ticks("W"), "lqr": ticks("WS")}, path)
    with path.open(newline="") as f:
        series = [row[1] for row in csv.reader(f)][1:]
    assert len(series) == 3 * len(PLOT_SERIES)
    assert "smc.v" in series
    assert "lqr.delta_x" in series
    assert all(name.startswith(("smc.", "lqr.")) for name in series)


def test_write_metrics(tmp_path: Path) -> None:
    path = tmp_path / "run.metrics.txt"
    metrics = aebsim.compute_metrics(ticks("SWWS"))
    write_metrics(metrics, path)
    text = path.read_text()
    assert text == format_metrics(metrics)
    lines = text.splitlines()
    assert lines[0] == "min_gap = 5"
    assert "collision = false" in lines
    assert "emergency_intervals = [[1, 3]]" in lines
    assert "stop_time_ego = none" in lines


def test_format_comparison() -> None:
    table = format_comparison(
        {
            "smc": aebsim.compute_metrics(ticks("SWWS")),
            "lqr": aebsim.compute_metrics([record(0.0, SR, delta_x=-0.5)]),
        }
    )
    rows = [line.split() for line in table.splitlines()]
    assert rows[0] == ["metric", "smc", "lqr"]
    assert len(rows) == 1 + len(fields(aebsim.RunMetrics))
    assert ["collision", "false", "true"] in rows
    assert ["min_gap", "5", "-0.5"] in rows
