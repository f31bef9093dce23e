"""PID cruise regulation between collision threats.

The PID sum is saturated as a whole and split between the axles in proportion to their
current normal loads. Anti-windup is conditional integration plus a hard clamp on the
integral at ``u_max / ki``. The derivative runs through a first-order filter with
coefficient ``N``, discretized with backward Euler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from aebsim._errors import InvalidParameter
from aebsim.command import ControlCommand, ControllerMode
from aebsim.vehicle import AxleLoads, VehicleParams


@dataclass(frozen=True, slots=True)
class PidGains:
    """PID gains and torque saturation. Defaults come from :meth:`from_pole_placement`."""

    kp: float = field(
        default=5623.2, metadata={"doc": "N m/(m/s); pole placement at 6 rad/s, damping 1"}
    )
    ki: float = field(
        default=16869.6, metadata={"doc": "N m/m; pole placement at 6 rad/s, damping 1"}
    )
    kd: float = field(default=42.6, metadata={"doc": "N m/(m/s^2); 10% of m_veh R"})
    N: float = field(default=50.0, metadata={"doc": "1/s; derivative filter coefficient"})
    u_max: float = field(default=1500.0, metadata={"doc": "N m; total torque saturation"})

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                msg = f"must be finite and non-negative, got {value!r}"
                raise InvalidParameter(msg, field=name)
        for name in ("N", "u_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                msg = f"must be finite and strictly positive, got {value!r}"
                raise InvalidParameter(msg, field=name)

    @property
    def is_hurwitz(self) -> bool:
        """Whether ``kd s^2 + kp s + ki`` has all roots in the open left half-plane."""
        return self.kd > 0 and self.kp > 0 and self.ki > 0

    @classmethod
    def from_pole_placement(
        cls,
        params: VehicleParams,
        natural_frequency: float = 6.0,
        damping: float = 1.0,
        derivative_share: float = 0.1,
        N: float = 50.0,
        u_max: float = 1500.0,
    ) -> PidGains:
        """Place the speed-error poles of the free-rolling plant ``m R v' = u``.

        The derivative gain adds to the effective inertia ``m R + kd``; ``kp`` and ``ki``
        then set the natural frequency and damping of the resulting second-order error
        dynamics. ``derivative_share`` picks ``kd`` as a fraction of ``m R``.
        """
        if natural_frequency <= 0 or damping <= 0 or derivative_share < 0:
            msg = "natural_frequency and damping must be positive, derivative_share non-negative"
            raise InvalidParameter(msg, field="from_pole_placement")
        inertia = params.m_veh * params.R
        kd = derivative_share * inertia
        m_eff = inertia + kd
        return cls(
            kp=2 * damping * natural_frequency * m_eff,
            ki=natural_frequency**2 * m_eff,
            kd=kd,
            N=N,
            u_max=u_max,
        )


@dataclass(frozen=True, slots=True)
class PidState:
    """Integral of the speed error, filtered derivative term, and the cruise anchor."""

    integral: float = 0.0
    deriv_filter: float = 0.0
    v_desired: float = 0.0
    last_error: float | None = None

    @classmethod
    def anchored(cls, v_desired: float) -> PidState:
        return cls(v_desired=v_desired)


def desired_speed(v_entry: float, decel_history: tuple[float, ...] = (), dt: float = 0.0) -> float:
    """Desired cruise speed: the entry speed plus the integral of the desired acceleration.

    While regulating the desired acceleration is zero, so this is the speed captured when
    the mode was entered.
    """
    return v_entry + math.fsum(decel_history) * dt


def allocate(u: float, loads: AxleLoads) -> tuple[float, float]:
    """Split a total torque between the axles by normal-load share."""
    share_f, share_r = loads.shares
    return u * share_f, u * share_r


def pid_torques(
    error: float,
    state: PidState,
    gains: PidGains,
    loads: AxleLoads,
    dt: float,
) -> tuple[ControlCommand, PidState]:
    """One PID update; returns the allocated axle torques and the next state."""
    previous = error if state.last_error is None else state.last_error
    deriv = (state.deriv_filter + gains.kd * gains.N * (error - previous)) / (1 + gains.N * dt)

    integral = state.integral + error * dt
    u_raw = gains.kp * error + gains.ki * integral + deriv
    if abs(u_raw) > gains.u_max and math.copysign(1, u_raw) == math.copysign(1, error):
        integral = state.integral
    if gains.ki > 0:
        bound = gains.u_max / gains.ki
        integral = min(max(integral, -bound), bound)

    u = gains.kp * error + gains.ki * integral + deriv
    u = min(max(u, -gains.u_max), gains.u_max)
    torque_f, torque_r = allocate(u, loads)

    command = ControlCommand(torque_f, torque_r, ControllerMode.SpeedRegulation)
    return command, replace(state, integral=integral, deriv_filter=deriv, last_error=error)


class SpeedRegulator:
    """Stateful wrapper that holds a :class:`PidState` across ticks of one run."""

    def __init__(self, gains: PidGains) -> None:
        self.gains = gains
        self.state = PidState()

    def reset(self, v_desired: float) -> None:
        self.state = PidState.anchored(v_desired)

    @property
    def v_desired(self) -> float:
        return self.state.v_desired

    def command(self, v: float, loads: AxleLoads, dt: float) -> ControlCommand:
        cmd, self.state = pid_torques(self.state.v_desired - v, self.state, self.gains, loads, dt)
        return cmd
