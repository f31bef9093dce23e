"""Gain-scheduled LQR stabilization of a constant-deceleration braking reference.

Each axle is designed on a reduced model: the body decelerates with the axle's own Magic
Formula friction evaluated directly on practical slip, and the wheel carries the axle's
share of the vehicle mass including load transfer::

    v'     = -g D sin(C atan(B lam))
    J w'   = T + m_axle g D sin(C atan(B lam)) R,      lam = 1 - w R / v

The reference is an exact solution of this model; the feedback gains are LQR gains of its
linearization, computed on a speed grid and interpolated.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from aebsim._errors import InvalidParameter, RiccatiError, SchedulingError
from aebsim.riccati import CareProblem, Matrix, solve_care
from aebsim.smc import slip_target_from_decel
from aebsim.vehicle import V_EPS, VehicleParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class LqrWeights:
    """State and input weights of the quadratic cost; state is ``(dv, domega)``."""

    Q: tuple[tuple[float, float], tuple[float, float]] = field(
        default=((1000.0, 0.0), (0.0, 1.0)),
        metadata={"doc": "state cost on (dv [m/s], domega [rad/s])"},
    )
    R_cost: float = field(default=1e-4, metadata={"doc": "1/(N m)^2; input cost"})
    grid_spacing: float = field(default=0.5, metadata={"doc": "m/s; gain-schedule spacing"})
    torque_max: float = field(
        default=3000.0, metadata={"doc": "N m; braking torque limit per axle"}
    )

    def __post_init__(self) -> None:
        q = np.asarray(self.Q, dtype=np.float64)
        if q.shape != (2, 2) or not np.all(np.isfinite(q)):
            msg = "must be a finite 2x2 matrix"
            raise InvalidParameter(msg, field="Q")
        if not np.allclose(q, q.T, rtol=0, atol=1e-12):
            msg = "must be symmetric"
            raise InvalidParameter(msg, field="Q")
        if np.min(np.linalg.eigvalsh(q)) < -1e-12:
            msg = "must be positive semidefinite"
            raise InvalidParameter(msg, field="Q")
        for name in ("R_cost", "grid_spacing", "torque_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                msg = f"must be finite and strictly positive, got {value!r}"
                raise InvalidParameter(msg, field=name)

    @property
    def Q_matrix(self) -> Matrix:
        return np.asarray(self.Q, dtype=np.float64)

    @property
    def R_matrix(self) -> Matrix:
        return np.array([[self.R_cost]])


def _shape(lam: float, params: VehicleParams) -> float:
    return params.D * math.sin(params.C * math.atan(params.B * lam))


def _shape_slope(lam: float, params: VehicleParams) -> float:
    u = params.B * lam
    return params.D * params.C * params.B * math.cos(params.C * math.atan(u)) / (1 + u * u)


def axle_masses(decel: float, params: VehicleParams) -> tuple[float, float]:
    """Front and rear axle mass shares including longitudinal load transfer."""
    transfer = params.m_veh * abs(decel) * params.h / (params.g * params.wheelbase)
    front = params.m_veh * params.lr / params.wheelbase + transfer
    rear = params.m_veh * params.lf / params.wheelbase - transfer
    return front, rear


def axle_model_derivative(
    v: float,
    omega: float,
    torque: float,
    axle_mass: float,
    params: VehicleParams,
) -> tuple[float, float]:
    """Right-hand side ``(v', omega')`` of the reduced per-axle design model."""
    friction = _shape(1 - omega * params.R / v, params)
    return (
        -params.g * friction,
        (torque + axle_mass * params.g * friction * params.R) / params.I,
    )


@dataclass(frozen=True, slots=True)
class ReferenceSample:
    t: float
    v_ref: float
    omega_ref: float
    torque_ref: float


@dataclass(frozen=True, slots=True)
class ReferenceTrajectory:
    """Constant-deceleration reference for one axle, starting at ``v0``.

    The wheel speed keeps the practical slip at ``lambda_ref``. Past the end of the
    trajectory (``v_ref = V_EPS``) the last sample is held.
    """

    v0: float
    lambda_ref: float
    decel: float
    axle_mass: float
    torque_ref: float
    R: float

    @property
    def duration(self) -> float:
        if self.decel == 0:
            return math.inf
        return (self.v0 - V_EPS) / -self.decel

    def sample(self, t: float) -> ReferenceSample:
        v_ref = max(self.v0 + self.decel * max(t, 0.0), V_EPS)
        return ReferenceSample(
            t=t,
            v_ref=v_ref,
            omega_ref=v_ref * (1 - self.lambda_ref) / self.R,
            torque_ref=self.torque_ref,
        )


def reference_trajectory(
    v0: float,
    lambda_ref: float,
    params: VehicleParams,
) -> tuple[ReferenceTrajectory, ReferenceTrajectory]:
    """Front and rear references for braking from ``v0`` at slip ``lambda_ref``."""
    if not v0 > V_EPS:
        msg = f"must exceed {V_EPS} m/s, got {v0!r}"
        raise InvalidParameter(msg, field="v0")
    if not 0 <= lambda_ref < 1:
        msg = f"must be in [0, 1), got {lambda_ref!r}"
        raise InvalidParameter(msg, field="lambda_ref")

    friction = _shape(lambda_ref, params)
    decel = -params.g * friction
    omega_dot = decel * (1 - lambda_ref) / params.R
    front_mass, rear_mass = axle_masses(decel, params)

    def build(axle_mass: float) -> ReferenceTrajectory:
        torque = params.I * omega_dot - axle_mass * params.g * friction * params.R
        return ReferenceTrajectory(
            v0=v0,
            lambda_ref=lambda_ref,
            decel=decel,
            axle_mass=axle_mass,
            torque_ref=torque,
            R=params.R,
        )

    return build(front_mass), build(rear_mass)


@dataclass(frozen=True, eq=False)
class LinearizedPlant:
    A: Matrix
    B: Matrix
    C_out: Matrix


def linearize(
    v_ref: float,
    omega_ref: float,
    axle_mass: float,
    params: VehicleParams,
) -> LinearizedPlant:
    """Jacobians of the design model in ``(dv, domega)`` and the slip output map."""
    if v_ref < V_EPS:
        msg = f"must be at least {V_EPS} m/s, got {v_ref!r}"
        raise InvalidParameter(msg, field="v_ref")
    R = params.R
    lam = 1 - omega_ref * R / v_ref
    slope = _shape_slope(lam, params)
    dlam_dv = omega_ref * R / v_ref**2
    dlam_domega = -R / v_ref
    wheel_gain = axle_mass * params.g * R / params.I
    return LinearizedPlant(
        A=np.array(
            [
                [-params.g * slope * dlam_dv, -params.g * slope * dlam_domega],
                [wheel_gain * slope * dlam_dv, wheel_gain * slope * dlam_domega],
            ]
        ),
        B=np.array([[0.0], [1 / params.I]]),
        C_out=np.array([[dlam_dv, dlam_domega]]),
    )


def scheduled_gain(plant: LinearizedPlant, weights: LqrWeights) -> Matrix:
    """LQR gain ``K`` (1x2) for one scheduling point."""
    problem = CareProblem(A=plant.A, B=plant.B, Q=weights.Q_matrix, R=weights.R_matrix)
    return solve_care(problem).K


@dataclass(frozen=True, eq=False)
class GainSchedule:
    """LQR gains on a grid of reference speeds, linearly interpolated between points."""

    speeds: Matrix
    gains: Matrix

    def __call__(self, v_ref: float) -> tuple[float, float]:
        return (
            float(np.interp(v_ref, self.speeds, self.gains[:, 0])),
            float(np.interp(v_ref, self.speeds, self.gains[:, 1])),
        )


@functools.lru_cache(maxsize=64)
def build_gain_schedule(
    lambda_ref: float,
    axle_mass: float,
    v_max: float,
    weights: LqrWeights,
    params: VehicleParams,
) -> GainSchedule:
    """Gains every ``weights.grid_spacing`` m/s from ``V_EPS`` up to at least ``v_max``.

    Raises:
        SchedulingError: if any grid point has no stabilizing gain.
    """
    count = max(2, math.ceil((v_max - V_EPS) / weights.grid_spacing) + 1)
    speeds = V_EPS + weights.grid_spacing * np.arange(count, dtype=np.float64)
    gains = np.empty((count, 2))
    for i, v_ref in enumerate(speeds):
        omega_ref = float(v_ref) * (1 - lambda_ref) / params.R
        plant = linearize(float(v_ref), omega_ref, axle_mass, params)
        try:
            K = scheduled_gain(plant, weights)
        except RiccatiError as e:
            raise SchedulingError(float(v_ref), e) from e
        closed_loop = np.linalg.eigvals(plant.A - plant.B @ K)
        if np.any(closed_loop.real >= 0):
            cause = RiccatiError(f"closed loop eigenvalues {closed_loop.tolist()}")
            raise SchedulingError(float(v_ref), cause)
        gains[i] = K[0]
    logger.debug(
        "Built %d-point gain schedule up to %.1f m/s for lambda_ref=%.5f, axle mass %.1f kg",
        count,
        speeds[-1],
        lambda_ref,
        axle_mass,
    )
    return GainSchedule(speeds=speeds, gains=gains)


def lqr_torque(
    v: float,
    omega: float,
    ref: ReferenceSample,
    K: tuple[float, float],
    torque_max: float,
) -> float:
    """``T_ref - K [dv, domega]`` clamped to ``[-torque_max, 0]``."""
    torque = ref.torque_ref - K[0] * (v - ref.v_ref) - K[1] * (omega - ref.omega_ref)
    return min(max(torque, -torque_max), 0.0)


@dataclass(frozen=True, slots=True)
class LqrOutput:
    torque_f: float
    torque_r: float
    lambda_ref_f: float
    lambda_ref_r: float
    v_ref: float


class LqrController:
    """Per-run controller: anchors references at emergency entry and tracks them."""

    def __init__(self, weights: LqrWeights, params: VehicleParams, v_max: float) -> None:
        self.weights = weights
        self.params = params
        self.v_max = v_max
        self.slip_target = 0.0
        self._references: tuple[ReferenceTrajectory, ReferenceTrajectory] | None = None
        self._schedules: tuple[GainSchedule, GainSchedule] | None = None
        self._t0 = 0.0
        self._exhausted = False

    def reset(self, t: float, v: float, decel_desired: float) -> None:
        """Anchor new references at the current speed and the requested deceleration."""
        self.slip_target = slip_target_from_decel(decel_desired, self.params)
        ref_f, ref_r = reference_trajectory(v, self.slip_target, self.params)
        self._references = (ref_f, ref_r)
        self._schedules = (
            build_gain_schedule(
                self.slip_target, ref_f.axle_mass, self.v_max, self.weights, self.params
            ),
            build_gain_schedule(
                self.slip_target, ref_r.axle_mass, self.v_max, self.weights, self.params
            ),
        )
        self._t0 = t
        self._exhausted = False

    def command(
        self,
        t: float,
        v: float,
        omega_f: float,
        omega_r: float,
        decel_desired: float,
    ) -> LqrOutput:
        if self._references is None or self._schedules is None:
            self.reset(t, v, decel_desired)
        assert self._references is not None
        assert self._schedules is not None
        ref_f, ref_r = self._references
        schedule_f, schedule_r = self._schedules

        elapsed = t - self._t0
        if not self._exhausted and elapsed > ref_f.duration:
            self._exhausted = True
            logger.warning("LQR reference exhausted at t=%.3f s; holding its final sample", t)
        sample_f = ref_f.sample(elapsed)
        sample_r = ref_r.sample(elapsed)
        torque_max = self.weights.torque_max
        return LqrOutput(
            torque_f=lqr_torque(v, omega_f, sample_f, schedule_f(sample_f.v_ref), torque_max),
            torque_r=lqr_torque(v, omega_r, sample_r, schedule_r(sample_r.v_ref), torque_max),
            lambda_ref_f=self.slip_target,
            lambda_ref_r=self.slip_target,
            v_ref=sample_f.v_ref,
        )
