"""Per-tick trace records, run metrics, and their text outputs."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from aebsim.command import ControllerMode
from aebsim.vehicle import V_EPS

type Interval = tuple[float, float]
"""A closed time interval ``(t_start, t_end)`` in seconds."""

PLOT_SERIES = (
    "v",
    "lead_v",
    "delta_x",
    "threshold",
    "lambda_f",
    "lambda_r",
    "lambda_ref_f",
    "lambda_ref_r",
    "torque_f",
    "torque_r",
    "decel_desired",
    "v_desired",
    "body_accel",
)
"""Trace columns exported to the long-format plot data."""


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """Every logged signal for one tick; values are taken before the plant step."""

    t: float
    x: float
    v: float
    omega_f: float
    omega_r: float
    lead_x: float
    lead_v: float
    delta_x: float
    threshold: float
    lambda_f: float
    lambda_r: float
    lambda_ref_f: float
    lambda_ref_r: float
    s_f: float
    s_r: float
    slip_rate_f: float
    slip_rate_r: float
    torque_f: float
    torque_r: float
    wsc_torque_f: float
    wsc_torque_r: float
    drive_torque_f: float
    drive_torque_r: float
    mode: ControllerMode
    decel_desired: float
    v_desired: float
    body_accel: float


TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))


@dataclass(frozen=True, slots=True)
class RunMetrics:
    min_gap: float
    final_gap: float
    stop_time_ego: float | None
    emergency_intervals: tuple[Interval, ...]
    regulation_intervals: tuple[Interval, ...]
    slip_rel_error_mean_f: float
    slip_rel_error_mean_r: float
    peak_deceleration: float
    collision: bool

    @property
    def first_emergency_end(self) -> float | None:
        return self.emergency_intervals[0][1] if self.emergency_intervals else None


def mode_intervals(trace: Sequence[TraceRecord], mode: ControllerMode) -> tuple[Interval, ...]:
    """Maximal runs of ``mode``; each ends at the first tick of the following mode."""
    intervals: list[Interval] = []
    start: float | None = None
    for record in trace:
        if record.mode == mode:
            if start is None:
                start = record.t
        elif start is not None:
            intervals.append((start, record.t))
            start = None
    if start is not None:
        intervals.append((start, trace[-1].t))
    return tuple(intervals)


def merge_intervals(intervals: Iterable[Interval], min_separation: float) -> tuple[Interval, ...]:
    """Join neighbouring intervals separated by less than ``min_separation``."""
    merged: list[Interval] = []
    for start, end in intervals:
        if merged and start - merged[-1][1] < min_separation:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))
    return tuple(merged)


def steady_emergency_ticks(
    trace: Sequence[TraceRecord],
    transient_window: float,
) -> list[TraceRecord]:
    """Wheel-slip-control ticks more than ``transient_window`` after their interval began."""
    steady = []
    start: float | None = None
    for record in trace:
        if record.mode != ControllerMode.WheelSlipControl:
            start = None
            continue
        if start is None:
            start = record.t
        if record.t - start > transient_window:
            steady.append(record)
    return steady


def _mean_relative_error(pairs: Iterable[tuple[float, float]]) -> float:
    errors = [abs(lam - ref) / ref for lam, ref in pairs if ref > 0]
    return math.fsum(errors) / len(errors) if errors else math.nan


def compute_metrics(trace: Sequence[TraceRecord], transient_window: float = 0.05) -> RunMetrics:
    """Summary metrics of a run. Slip errors are ``nan`` when no steady emergency tick exists.

    Emergency runs split by a regulation blip shorter than ``transient_window`` count as one
    interval, and the blip is not a regulation interval. The steady ticks behind the slip
    metrics still restart their transient at every activation.
    """
    if not trace:
        msg = "cannot compute metrics of an empty trace"
        raise ValueError(msg)

    gaps = [record.delta_x for record in trace]
    emergency = merge_intervals(
        mode_intervals(trace, ControllerMode.WheelSlipControl), transient_window
    )
    regulation = tuple(
        (start, end)
        for start, end in mode_intervals(trace, ControllerMode.SpeedRegulation)
        if not any(outer[0] <= start and end <= outer[1] for outer in emergency)
    )
    stop_time = next((record.t for record in trace if record.v < V_EPS), None)
    steady = steady_emergency_ticks(trace, transient_window)
    min_gap = min(gaps)

    return RunMetrics(
        min_gap=min_gap,
        final_gap=gaps[-1],
        stop_time_ego=stop_time,
        emergency_intervals=emergency,
        regulation_intervals=regulation,
        slip_rel_error_mean_f=_mean_relative_error((r.lambda_f, r.lambda_ref_f) for r in steady),
        slip_rel_error_mean_r=_mean_relative_error((r.lambda_r, r.lambda_ref_r) for r in steady),
        peak_deceleration=max((-r.body_accel for r in steady), default=0.0),
        collision=min_gap <= 0,
    )


def format_value(value: object) -> str:
    """Text form used in every output file: 9 significant digits for floats."""
    match value:
        case bool():
            return "true" if value else "false"
        case float():
            return f"{value:.9g}"
        case None:
            return "none"
        case tuple() | list():
            return "[" + ", ".join(format_value(v) for v in value) + "]"
        case _:
            return str(value)


def write_trace_csv(trace: Iterable[TraceRecord], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_FIELDS)
        for record in trace:
            writer.writerow(format_value(v) for v in astuple(record))


def metrics_items(metrics: RunMetrics) -> dict[str, object]:
    return {f.name: getattr(metrics, f.name) for f in fields(RunMetrics)}


def format_metrics(metrics: RunMetrics) -> str:
    items = metrics_items(metrics).items()
    return "".join(f"{key} = {format_value(value)}\n" for key, value in items)


def write_metrics(metrics: RunMetrics, path: Path) -> None:
    path.write_text(format_metrics(metrics), encoding="utf-8")


def format_comparison(metrics: Mapping[str, RunMetrics]) -> str:
    """Side-by-side metrics table, one column per controller."""
    names = list(metrics)
    rows = [("metric", *names)]
    for f in fields(RunMetrics):
        rows.append((f.name, *(format_value(getattr(metrics[n], f.name)) for n in names)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = (
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths, strict=True)).rstrip()
        for row in rows
    )
    return "".join(f"{line}\n" for line in lines)


def plot_rows(
    trace: Iterable[TraceRecord],
    prefix: str = "",
) -> Iterable[tuple[str, str, str]]:
    for record in trace:
        t = format_value(record.t)
        for series in PLOT_SERIES:
            yield t, f"{prefix}{series}", format_value(getattr(record, series))


def write_plot_csv(traces: Mapping[str, Sequence[TraceRecord]], path: Path) -> None:
    """Long-format ``t, series, value`` rows; series are prefixed when several runs share a file."""
    prefixed = len(traces) > 1
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("t", "series", "value"))
        for name, trace in traces.items():
            writer.writerows(plot_rows(trace, f"{name}." if prefixed else ""))
