"""Fixed-step closed-loop simulation of the emergency braking scenario.

Every tick runs the supervisor, picks the controller mode, computes torques, records a
trace row, then advances the EGO plant with RK4 (torques held over the step) and the lead
vehicle in closed form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from aebsim._errors import InvalidParameter, ModelValidityError
from aebsim.command import ControlCommand, Controller, ControllerMode
from aebsim.lqr import LqrController, LqrWeights
from aebsim.smc import SlidingModeController, SmcParams
from aebsim.speed_regulator import PidGains, SpeedRegulator, desired_speed
from aebsim.supervisor import (
    SupervisorInputs,
    SupervisorSettings,
    rbsc_step,
    standstill_hold,
    switch_mode,
    switching_algorithm,
)
from aebsim.trace import RunMetrics, TraceRecord, compute_metrics
from aebsim.vehicle import (
    V_EPS,
    VehicleParams,
    VehicleState,
    derivative,
    slip_rate,
    state_derivative,
    tire_forces,
    wheel_slips,
)

logger = logging.getLogger(__name__)

DT_RANGE = (1e-4, 1e-2)


@dataclass(frozen=True, slots=True)
class Scenario:
    """Initial conditions, road friction and lead-vehicle behaviour of one run."""

    name: str = field(default="s3", metadata={"doc": "output file prefix"})
    v0_ego: float = field(default=100 / 3.6, metadata={"doc": "m/s; EGO initial speed, 100 km/h"})
    v0_lead: float = field(default=100 / 3.6, metadata={"doc": "m/s; lead initial speed, 100 km/h"})
    gap0: float = field(default=10.0, metadata={"doc": "m; initial gap to the lead vehicle"})
    lead_decel: float = field(default=-8.0, metadata={"doc": "m/s^2; lead deceleration, <= 0"})
    mu_peak: float = field(default=0.9, metadata={"doc": "-; road peak friction, (0, 1.2]"})
    margin: float = field(default=1.0, metadata={"doc": "m; static safety margin"})
    controller: Controller = field(default=Controller.SMC, metadata={"doc": "smc or lqr"})
    dt: float = field(default=1e-3, metadata={"doc": "s; step size, [1e-4, 1e-2]"})
    t_max: float = field(default=10.0, metadata={"doc": "s; run length limit"})
    lead_detected: bool = field(default=True, metadata={"doc": "whether sensors track the lead"})

    def __post_init__(self) -> None:
        if not self.name or not all(c.isalnum() or c in "-_." for c in self.name):
            msg = f"must be a non-empty file-name-safe string, got {self.name!r}"
            raise InvalidParameter(msg, field="name")
        for name in ("v0_ego", "v0_lead", "gap0", "lead_decel", "mu_peak", "margin", "dt", "t_max"):
            if not math.isfinite(getattr(self, name)):
                msg = "must be finite"
                raise InvalidParameter(msg, field=name)
        if self.v0_ego < 0 or self.v0_lead < 0:
            msg = "initial speeds must be non-negative"
            raise InvalidParameter(msg, field="v0_ego" if self.v0_ego < 0 else "v0_lead")
        if self.gap0 <= 0:
            msg = f"must be positive, got {self.gap0!r}"
            raise InvalidParameter(msg, field="gap0")
        if self.lead_decel > 0:
            msg = f"must be <= 0, got {self.lead_decel!r}"
            raise InvalidParameter(msg, field="lead_decel")
        if not 0 < self.mu_peak <= 1.2:
            msg = f"must be in (0, 1.2], got {self.mu_peak!r}"
            raise InvalidParameter(msg, field="mu_peak")
        if self.margin < 0:
            msg = f"must be non-negative, got {self.margin!r}"
            raise InvalidParameter(msg, field="margin")
        if not DT_RANGE[0] <= self.dt <= DT_RANGE[1]:
            msg = f"must be in [{DT_RANGE[0]}, {DT_RANGE[1]}], got {self.dt!r}"
            raise InvalidParameter(msg, field="dt")
        stopping_time = self.v0_ego / (self.mu_peak * 9.81)
        if self.t_max < stopping_time:
            msg = f"must cover the {stopping_time:.3f} s needed to stop, got {self.t_max!r}"
            raise InvalidParameter(msg, field="t_max")


@dataclass(frozen=True, slots=True)
class SimulationSettings:
    transient_window: float = field(
        default=0.05, metadata={"doc": "s; activation transient excluded from slip metrics"}
    )
    stability_limit: float = field(
        default=2.0, metadata={"doc": "-; largest stiffness * substep for the RK4 plant step"}
    )

    def __post_init__(self) -> None:
        if not (math.isfinite(self.transient_window) and self.transient_window >= 0):
            msg = "must be finite and non-negative"
            raise InvalidParameter(msg, field="transient_window")
        if not 0 < self.stability_limit <= 2.5:
            msg = f"must be in (0, 2.5], got {self.stability_limit!r}"
            raise InvalidParameter(msg, field="stability_limit")


@dataclass(frozen=True, slots=True)
class SimulationConfig:
    """Everything a run depends on. Equal configs produce bit-identical runs."""

    vehicle: VehicleParams = field(default_factory=VehicleParams)
    scenario: Scenario = field(default_factory=Scenario)
    supervisor: SupervisorSettings = field(default_factory=SupervisorSettings)
    smc: SmcParams = field(default_factory=SmcParams)
    lqr: LqrWeights = field(default_factory=LqrWeights)
    pid: PidGains = field(default_factory=PidGains)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)


@dataclass(frozen=True, slots=True)
class LeadState:
    x: float
    v: float


class SimulationResult(NamedTuple):
    trace: list[TraceRecord]
    metrics: RunMetrics


def lead_vehicle_step(state: LeadState, decel: float, dt: float) -> LeadState:
    """Exact constant-deceleration kinematics, stopping at rest."""
    if state.v <= 0:
        return LeadState(x=state.x, v=0.0)
    if decel < 0 and state.v <= -decel * dt:
        return LeadState(x=state.x + state.v**2 / (2 * -decel), v=0.0)
    return LeadState(x=state.x + state.v * dt + 0.5 * decel * dt * dt, v=state.v + decel * dt)


def substep_count(v: float, dt: float, params: VehicleParams, stability_limit: float = 2.0) -> int:
    """Substeps that keep RK4 inside its stability region for the wheel-slip dynamics.

    The slip dynamics stiffen as ``1 / v``; the bound uses the steepest Magic Formula slope
    and the full vehicle weight.
    """
    if v <= V_EPS:
        return 1
    stiffness = (
        params.R**2 * params.D * params.C * abs(params.B) * params.weight / (params.I * v)
    )
    return max(1, math.ceil(dt * stiffness / stability_limit))


def _clamp(v: float, omega_f: float, omega_r: float, R: float) -> tuple[float, float, float]:
    if v <= 0:
        return 0.0, 0.0, 0.0
    if v <= V_EPS:
        return v, v / R, v / R
    return v, max(omega_f, 0.0), max(omega_r, 0.0)


def integrate_step(
    state: VehicleState,
    cmd: ControlCommand,
    dt: float,
    params: VehicleParams,
    stability_limit: float = 2.0,
) -> VehicleState:
    """Advance the plant by ``dt`` with classical RK4, torques held constant.

    The standstill clamp (``v >= 0``, wheels rolling below ``V_EPS``, no reverse wheel
    spin) is applied after every substep.
    """
    tf, tr = cmd.torque_f, cmd.torque_r
    x, v, wf, wr = state.x, state.v, state.omega_f, state.omega_r
    n = substep_count(v, dt, params, stability_limit)
    h = dt / n
    for _ in range(n):
        k1 = derivative(v, wf, wr, tf, tr, params)
        k2 = derivative(v + h / 2 * k1[1], wf + h / 2 * k1[2], wr + h / 2 * k1[3], tf, tr, params)
        k3 = derivative(v + h / 2 * k2[1], wf + h / 2 * k2[2], wr + h / 2 * k2[3], tf, tr, params)
        k4 = derivative(v + h * k3[1], wf + h * k3[2], wr + h * k3[3], tf, tr, params)
        x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        wf += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        wr += h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        v, wf, wr = _clamp(v, wf, wr, params.R)
    return VehicleState(x=x, v=v, omega_f=wf, omega_r=wr)


def run_scenario(config: SimulationConfig) -> SimulationResult:
    """Simulate until both vehicles are below ``V_EPS`` or ``t_max`` is reached.

    Collisions are recorded in the metrics, not raised.

    Raises:
        ModelValidityError: if the plant leaves its domain of validity.
        SchedulingError: if the LQR gain schedule cannot be built.
    """
    params = config.vehicle
    scenario = config.scenario
    dt = scenario.dt
    steps = round(scenario.t_max / dt)

    regulator = SpeedRegulator(config.pid)
    smc = SlidingModeController(config.smc, params, dt)
    lqr = LqrController(config.lqr, params, v_max=max(scenario.v0_ego, V_EPS) + 5.0)
    hold = standstill_hold(scenario.mu_peak, params)

    state = VehicleState.rolling(scenario.v0_ego, params)
    lead = LeadState(x=scenario.gap0, v=scenario.v0_lead)
    engaged = False
    mode: ControllerMode | None = None
    v_desired = 0.0
    trace: list[TraceRecord] = []

    logger.info(
        "Running scenario %r with %s: v0=%.3f m/s, gap0=%.2f m, dt=%g s",
        scenario.name,
        scenario.controller.value,
        scenario.v0_ego,
        scenario.gap0,
        dt,
    )
    for k in range(steps + 1):
        t = k * dt
        delta_x = lead.x - state.x
        inputs = SupervisorInputs(
            v_ego=state.v,
            delta_x=delta_x,
            mu_peak=scenario.mu_peak,
            lead_detected=scenario.lead_detected,
            engaged=engaged,
        )
        supervised = rbsc_step(
            inputs,
            scenario.margin,
            g=params.g,
            activation_speed=config.supervisor.activation_speed,
        )
        new_mode = switch_mode(supervised, state.v)
        if new_mode != mode:
            logger.debug(
                "t=%.3f s: %s -> %s at v=%.3f m/s, gap=%.3f m, threshold=%.3f m",
                t,
                mode,
                new_mode,
                state.v,
                delta_x,
                supervised.threshold,
            )
            regulator.reset(state.v)
            if new_mode is ControllerMode.WheelSlipControl:
                smc.reset()
                if scenario.controller is Controller.LQR:
                    lqr.reset(t, state.v, supervised.decel_desired)
            v_desired = desired_speed(state.v) if new_mode is not ControllerMode.Standstill else 0.0
            mode = new_mode

        loads, forces = tire_forces(state, params)
        slips = wheel_slips(state, params)
        body_accel = forces.total / params.m_veh
        wsc = (0.0, 0.0)
        drive = (0.0, 0.0)
        refs = (0.0, 0.0)

        if mode is ControllerMode.WheelSlipControl:
            if scenario.controller is Controller.SMC:
                smc_out = smc.command(
                    state.v,
                    slips,
                    (forces.fFx, forces.fRx),
                    body_accel,
                    supervised.decel_desired,
                )
                wsc = (smc_out.torque_f, smc_out.torque_r)
                refs = (smc_out.lambda_ref_f, smc_out.lambda_ref_r)
            else:
                lqr_out = lqr.command(
                    t, state.v, state.omega_f, state.omega_r, supervised.decel_desired
                )
                wsc = (lqr_out.torque_f, lqr_out.torque_r)
                refs = (lqr_out.lambda_ref_f, lqr_out.lambda_ref_r)
                v_desired = lqr_out.v_ref
        elif mode is ControllerMode.SpeedRegulation:
            drive_cmd = regulator.command(state.v, loads, dt)
            drive = (drive_cmd.torque_f, drive_cmd.torque_r)
            v_desired = regulator.v_desired

        switched = switching_algorithm(mode, wsc, drive, hold)
        command = switched.command
        rates = (0.0, 0.0)
        try:
            d = state_derivative(state, command, params)
        except ModelValidityError:
            logger.exception("Plant left its valid domain at t=%.3f s", t)
            raise
        if state.v > V_EPS:
            rates = (
                slip_rate(state.v, state.omega_f, d.v_dot, d.omega_f_dot, params.R),
                slip_rate(state.v, state.omega_r, d.v_dot, d.omega_r_dot, params.R),
            )
        active = mode is ControllerMode.WheelSlipControl

        trace.append(
            TraceRecord(
                t=t,
                x=state.x,
                v=state.v,
                omega_f=state.omega_f,
                omega_r=state.omega_r,
                lead_x=lead.x,
                lead_v=lead.v,
                delta_x=delta_x,
                threshold=supervised.threshold,
                lambda_f=slips[0],
                lambda_r=slips[1],
                lambda_ref_f=refs[0],
                lambda_ref_r=refs[1],
                s_f=slips[0] - refs[0] if active else 0.0,
                s_r=slips[1] - refs[1] if active else 0.0,
                slip_rate_f=rates[0],
                slip_rate_r=rates[1],
                torque_f=command.torque_f,
                torque_r=command.torque_r,
                wsc_torque_f=switched.wsc_torque_f,
                wsc_torque_r=switched.wsc_torque_r,
                drive_torque_f=switched.drive_torque_f,
                drive_torque_r=switched.drive_torque_r,
                mode=mode,
                decel_desired=supervised.decel_desired,
                v_desired=v_desired,
                body_accel=d.v_dot,
            )
        )

        if state.v < V_EPS and lead.v < V_EPS:
            break
        if k == steps:
            logger.warning("Reached t_max=%g s before both vehicles stopped", scenario.t_max)
            break

        engaged = (engaged or supervised.emergency_active) and state.v > V_EPS
        if active and scenario.controller is Controller.SMC:
            v_desired = max(desired_speed(v_desired, (supervised.decel_desired,), dt), 0.0)
        state = integrate_step(state, command, dt, params, config.simulation.stability_limit)
        lead = lead_vehicle_step(lead, scenario.lead_decel, dt)

    metrics = compute_metrics(trace, config.simulation.transient_window)
    if metrics.collision:
        logger.warning(
            "Collision in scenario %r with %s: min gap %.3f m",
            scenario.name,
            scenario.controller.value,
            metrics.min_gap,
        )
    logger.info(
        "Finished scenario %r with %s after %d ticks: final gap %.3f m, stop time %s s",
        scenario.name,
        scenario.controller.value,
        len(trace),
        metrics.final_gap,
        metrics.stop_time_ego,
    )
    return SimulationResult(trace=trace, metrics=metrics)
