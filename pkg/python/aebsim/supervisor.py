"""Rule-based supervisory control and the switching algorithm between low-level controllers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import assert_never

from aebsim._errors import InvalidParameter
from aebsim.command import ControlCommand, ControllerMode
from aebsim.vehicle import V_EPS, VehicleParams

ACTIVATION_SPEED = 4.0
"""Speed (m/s) above which an emergency can be entered."""


@dataclass(frozen=True, slots=True)
class SupervisorSettings:
    activation_speed: float = field(
        default=ACTIVATION_SPEED,
        metadata={"doc": "m/s; an emergency can only be entered above this speed"},
    )

    def __post_init__(self) -> None:
        if not (math.isfinite(self.activation_speed) and self.activation_speed >= 0):
            msg = "must be finite and non-negative"
            raise InvalidParameter(msg, field="activation_speed")


@dataclass(frozen=True, slots=True)
class SupervisorInputs:
    """What the supervisor sees on one tick.

    ``engaged`` is the threat latch kept by the simulation loop: set once an emergency has
    been raised and cleared at standstill. Below the activation speed an engaged
    emergency stays active until the vehicle stops.
    """

    v_ego: float
    delta_x: float
    mu_peak: float
    lead_detected: bool = True
    engaged: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_ego) and self.v_ego >= 0):
            msg = "must be finite and non-negative"
            raise InvalidParameter(msg, field="v_ego")
        if not math.isfinite(self.delta_x):
            msg = "must be finite"
            raise InvalidParameter(msg, field="delta_x")
        if not 0 < self.mu_peak <= 1.2:
            msg = f"must be in (0, 1.2], got {self.mu_peak!r}"
            raise InvalidParameter(msg, field="mu_peak")


@dataclass(frozen=True, slots=True)
class SupervisorOutput:
    decel_desired: float
    threshold: float
    emergency_active: bool


@dataclass(frozen=True, slots=True)
class SwitchedTorques:
    """All controller outputs after switching; the inactive controller's pair is zero."""

    mode: ControllerMode
    wsc_torque_f: float
    wsc_torque_r: float
    drive_torque_f: float
    drive_torque_r: float
    hold_torque_f: float = 0.0
    hold_torque_r: float = 0.0

    @property
    def command(self) -> ControlCommand:
        return ControlCommand(
            torque_f=self.wsc_torque_f + self.drive_torque_f + self.hold_torque_f,
            torque_r=self.wsc_torque_r + self.drive_torque_r + self.hold_torque_r,
            mode=self.mode,
        )


def min_braking_distance(v_ego: float, mu_peak: float, g: float) -> float:
    if v_ego < 0:
        msg = "must be non-negative"
        raise InvalidParameter(msg, field="v_ego")
    if mu_peak <= 0:
        msg = "must be strictly positive"
        raise InvalidParameter(msg, field="mu_peak")
    return v_ego**2 / (2 * mu_peak * g)


def distance_threshold(x_br_min: float, margin: float) -> float:
    if margin < 0:
        msg = "must be non-negative"
        raise InvalidParameter(msg, field="margin")
    return x_br_min + margin


def target_deceleration(v_ego: float, x_br_min: float) -> float:
    """Deceleration that stops the vehicle within ``x_br_min``; zero at standstill."""
    if x_br_min <= 0:
        if v_ego == 0:
            return 0.0
        msg = f"must be positive while moving, got {x_br_min!r}"
        raise InvalidParameter(msg, field="x_br_min")
    return -(v_ego**2) / (2 * x_br_min)


def rbsc_step(
    inputs: SupervisorInputs,
    margin: float,
    *,
    g: float = 9.81,
    activation_speed: float = ACTIVATION_SPEED,
) -> SupervisorOutput:
    """One evaluation of the braking rule: brake at the adhesion limit once inside the threshold."""
    x_br_min = min_braking_distance(inputs.v_ego, inputs.mu_peak, g)
    threshold = distance_threshold(x_br_min, margin)

    if inputs.v_ego > activation_speed:
        threat = inputs.delta_x <= threshold
    else:
        threat = inputs.engaged
    emergency = inputs.lead_detected and threat and inputs.v_ego > 0

    decel = target_deceleration(inputs.v_ego, x_br_min) if emergency else 0.0
    return SupervisorOutput(decel_desired=decel, threshold=threshold, emergency_active=emergency)


def switch_mode(output: SupervisorOutput, v_ego: float) -> ControllerMode:
    if v_ego <= V_EPS:
        return ControllerMode.Standstill
    if abs(output.decel_desired) > 0:
        return ControllerMode.WheelSlipControl
    return ControllerMode.SpeedRegulation


def switching_algorithm(
    mode: ControllerMode,
    wsc: tuple[float, float],
    drive: tuple[float, float],
    hold: tuple[float, float] = (0.0, 0.0),
) -> SwitchedTorques:
    """Route the active controller's torques to the axles and zero the others."""
    zero = (0.0, 0.0)
    match mode:
        case ControllerMode.WheelSlipControl:
            wsc_pair, drive_pair, hold_pair = wsc, zero, zero
        case ControllerMode.SpeedRegulation:
            wsc_pair, drive_pair, hold_pair = zero, drive, zero
        case ControllerMode.Standstill:
            wsc_pair, drive_pair, hold_pair = zero, zero, hold
        case _:
            assert_never(mode)
    return SwitchedTorques(
        mode=mode,
        wsc_torque_f=wsc_pair[0],
        wsc_torque_r=wsc_pair[1],
        drive_torque_f=drive_pair[0],
        drive_torque_r=drive_pair[1],
        hold_torque_f=hold_pair[0],
        hold_torque_r=hold_pair[1],
    )


def standstill_hold(mu_peak: float, params: VehicleParams) -> tuple[float, float]:
    """Braking torques that bring a crawling vehicle to rest at the adhesion limit."""
    total = -params.m_veh * mu_peak * params.g * params.R
    share_f, share_r = params.static_loads.shares
    return total * share_f, total * share_r
