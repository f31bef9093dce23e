"""Sliding-mode wheel-slip control.

The sliding surface is the slip error ``s = lam - lam_ref``. The braking torque is the
equivalent control (the torque that holds the slip still) plus a switching term on a
saturated linear boundary layer. Overslip (``s > 0``) moves the torque towards zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

from scipy.optimize import brentq

from aebsim._errors import InvalidParameter
from aebsim.vehicle import VehicleParams, pacejka_mu

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class SmcParams:
    """Tuning of the sliding-mode controller.

    ``lambda_ref_f`` and ``lambda_ref_r`` pin the slip targets; left unset, the targets
    follow the supervisor's desired deceleration.
    """

    eta: float = field(default=500.0, metadata={"doc": "1/s; reaching-law rate"})
    a: float = field(default=1.0, metadata={"doc": "-; boundary-layer slope"})
    boundary_layer: float = field(
        default=0.005, metadata={"doc": "-; |s| below which the sliding condition is not checked"}
    )
    torque_max: float = field(
        default=3000.0, metadata={"doc": "N m; braking torque limit per axle"}
    )
    lambda_ref_f: float | None = field(
        default=None, metadata={"doc": "-; fixed front slip target, unset follows the supervisor"}
    )
    lambda_ref_r: float | None = field(
        default=None, metadata={"doc": "-; fixed rear slip target, unset follows the supervisor"}
    )

    def __post_init__(self) -> None:
        for name in ("eta", "a", "boundary_layer", "torque_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                msg = f"must be finite and strictly positive, got {value!r}"
                raise InvalidParameter(msg, field=name)
        for name in ("lambda_ref_f", "lambda_ref_r"):
            value = getattr(self, name)
            if value is not None and not 0 < value < 1:
                msg = f"must be in (0, 1), got {value!r}"
                raise InvalidParameter(msg, field=name)


@dataclass(frozen=True, slots=True)
class SlidingState:
    s_f: float
    s_r: float


@dataclass(frozen=True, slots=True)
class SmcOutput:
    torque_f: float
    torque_r: float
    lambda_ref_f: float
    lambda_ref_r: float
    sliding: SlidingState


def slip_target_from_decel(decel_desired: float, params: VehicleParams) -> float:
    """Practical slip on the stable branch whose friction produces ``decel_desired``.

    Requests beyond adhesion clamp to the peak slip.
    """
    mu_req = abs(decel_desired) / params.g
    if mu_req == 0:
        return 0.0
    if mu_req >= params.D * (1 - 1e-9):
        if mu_req > params.D * (1 + 1e-9):
            logger.warning(
                "Requested %.4f m/s^2 exceeds adhesion; slip target clamped to the peak",
                decel_desired,
            )
        return params.peak_practical_slip
    s_ref = brentq(lambda s: pacejka_mu(s, params) - mu_req, 0.0, params.peak_slip, xtol=1e-15)
    return float(s_ref / (1 + s_ref))


def equivalent_torque(
    friction_force: float,
    body_accel: float,
    slip: float,
    params: VehicleParams,
) -> float:
    """Axle torque that keeps the practical slip constant for the current force and acceleration."""
    return friction_force * params.R + (params.I * body_accel / params.R) * (1 - slip)


def switching_torque(s: float, v: float, smc: SmcParams, params: VehicleParams) -> float:
    bound = smc.eta * params.I * v / params.R
    if s >= 1:
        return bound
    if s <= -1:
        return -bound
    return bound * smc.a * s


def smc_torque(
    friction_force: float,
    body_accel: float,
    slip: float,
    lambda_ref: float,
    v: float,
    smc: SmcParams,
    params: VehicleParams,
) -> float:
    """Braking torque for one axle, clamped to ``[-torque_max, 0]``."""
    torque = equivalent_torque(friction_force, body_accel, slip, params) + switching_torque(
        slip - lambda_ref, v, smc, params
    )
    return min(max(torque, -smc.torque_max), 0.0)


class SlidingModeController:
    """Per-run controller; latches the slip targets until the desired deceleration changes.

    Given the loop step ``dt``, the reaching rate is capped at ``1 / (a * dt)`` so one
    sampled tick never pushes the slip past its target.
    """

    def __init__(self, smc: SmcParams, params: VehicleParams, dt: float | None = None) -> None:
        if dt is not None and smc.eta * smc.a * dt > 1:
            logger.info(
                "Reaching rate %.4g 1/s capped at %.4g 1/s for dt=%g s",
                smc.eta,
                1 / (smc.a * dt),
                dt,
            )
            smc = replace(smc, eta=1 / (smc.a * dt))
        self.smc = smc
        self.params = params
        self._decel: float | None = None
        self._targets = (0.0, 0.0)

    def reset(self) -> None:
        self._decel = None
        self._targets = (0.0, 0.0)

    def targets(self, decel_desired: float) -> tuple[float, float]:
        if decel_desired != self._decel:
            derived = slip_target_from_decel(decel_desired, self.params)
            peak = self.params.peak_practical_slip
            front = derived if self.smc.lambda_ref_f is None else min(self.smc.lambda_ref_f, peak)
            rear = derived if self.smc.lambda_ref_r is None else min(self.smc.lambda_ref_r, peak)
            self._decel = decel_desired
            self._targets = (front, rear)
        return self._targets

    def command(
        self,
        v: float,
        slips: tuple[float, float],
        forces: tuple[float, float],
        body_accel: float,
        decel_desired: float,
    ) -> SmcOutput:
        ref_f, ref_r = self.targets(decel_desired)
        return SmcOutput(
            torque_f=smc_torque(forces[0], body_accel, slips[0], ref_f, v, self.smc, self.params),
            torque_r=smc_torque(forces[1], body_accel, slips[1], ref_r, v, self.smc, self.params),
            lambda_ref_f=ref_f,
            lambda_ref_r=ref_r,
            sliding=SlidingState(s_f=slips[0] - ref_f, s_r=slips[1] - ref_r),
        )
