"""The reference braking scenario: both cars at 100 km/h, 10 m apart, lead braking at 8 m/s^2."""

import pytest

import aebsim
from aebsim.command import ControllerMode
from aebsim.trace import steady_emergency_ticks
from aebsim.vehicle import V_EPS

RUNS = ["smc_run", "lqr_run"]


def test_emergency_starts_immediately(smc_run: aebsim.SimulationResult) -> None:
    first = smc_run.trace[0]
    assert first.threshold == pytest.approx(44.69, abs=0.5)
    assert first.delta_x < first.threshold
    assert smc_run.metrics.emergency_intervals[0][0] == 0.0


@pytest.mark.parametrize("run", RUNS)
def test_stops_behind_lead_without_collision(run: str, request: pytest.FixtureRequest) -> None:
    result: aebsim.SimulationResult = request.getfixturevalue(run)
    metrics = result.metrics
    assert not metrics.collision
    assert metrics.min_gap > 0
    assert metrics.final_gap == pytest.approx(1.0, abs=0.3)
    assert metrics.stop_time_ego is not None
    assert result.trace[-1].v < V_EPS


@pytest.mark.parametrize("run", RUNS)
def test_regulator_takes_over_between_threats(run: str, request: pytest.FixtureRequest) -> None:
    result: aebsim.SimulationResult = request.getfixturevalue(run)
    metrics = result.metrics
    assert 1 <= len(metrics.regulation_intervals) <= 2
    assert 2 <= len(metrics.emergency_intervals) <= 3
    first_end = metrics.first_emergency_end
    assert first_end is not None
    assert metrics.regulation_intervals[0][0] == first_end


@pytest.mark.parametrize("run", RUNS)
def test_regulation_keeps_threshold_distance(run: str, request: pytest.FixtureRequest) -> None:
    result: aebsim.SimulationResult = request.getfixturevalue(run)
    first_end = result.metrics.first_emergency_end
    assert first_end is not None
    regulating = [
        r
        for r in result.trace
        if r.t >= first_end and r.mode is ControllerMode.SpeedRegulation
    ]
    assert regulating
    assert all(r.delta_x >= r.threshold - 0.05 for r in regulating)


def test_sliding_mode_tracks_slip_tighter_than_lqr(
    smc_run: aebsim.SimulationResult, lqr_run: aebsim.SimulationResult
) -> None:
    smc, lqr = smc_run.metrics, lqr_run.metrics
    assert smc.slip_rel_error_mean_f < 0.01
    assert smc.slip_rel_error_mean_r < 0.01
    assert 0.02 <= lqr.slip_rel_error_mean_f <= 0.08
    assert 0.02 <= lqr.slip_rel_error_mean_r <= 0.08
    assert smc.slip_rel_error_mean_f < lqr.slip_rel_error_mean_f
    assert smc.slip_rel_error_mean_r < lqr.slip_rel_error_mean_r


def test_sliding_mode_clears_first_threat_no_later(
    smc_run: aebsim.SimulationResult, lqr_run: aebsim.SimulationResult
) -> None:
    smc_end = smc_run.metrics.first_emergency_end
    lqr_end = lqr_run.metrics.first_emergency_end
    assert smc_end is not None
    assert lqr_end is not None
    assert smc_end <= lqr_end


@pytest.mark.parametrize("run", RUNS)
def test_steady_braking_at_adhesion_limit(run: str, request: pytest.FixtureRequest) -> None:
    result: aebsim.SimulationResult = request.getfixturevalue(run)
    steady = steady_emergency_ticks(result.trace, aebsim.SimulationSettings().transient_window)
    assert steady
    assert all(8.0 <= -r.body_accel <= 8.83 for r in steady)
    assert 8.0 <= result.metrics.peak_deceleration <= 8.83
