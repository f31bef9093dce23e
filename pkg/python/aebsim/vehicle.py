"""Longitudinal single-track plant: Magic Formula tires, load transfer, body and wheel dynamics.

Sign convention: braking friction coefficients and forces are negative. The slip fed to
the Magic Formula is negated so that a braking wheel (positive practical slip) produces a
decelerating force and the load-transfer term moves load onto the front axle.

Evaluation order for one state is slip, theoretical slip, friction coefficient, axle loads,
then forces. The friction coefficients depend on slip alone, so the load/friction coupling
resolves in a single pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from aebsim._errors import InvalidParameter, ModelValidityError, SlipUndefined
from aebsim.command import ControlCommand

V_EPS = 0.1
"""Speed (m/s) at or below which slip is undefined and the kinematic stop model applies."""

S_MAX = 100.0
"""Clamp on the theoretical slip of a (nearly) locked wheel."""


@dataclass(frozen=True, slots=True)
class VehicleParams:
    """Physical constants of the test vehicle. Defaults are the reference vehicle data."""

    m_veh: float = field(default=1420.0, metadata={"doc": "kg; vehicle mass"})
    g: float = field(default=9.81, metadata={"doc": "m/s^2; gravitational acceleration"})
    B: float = field(default=24.0, metadata={"doc": "-; Magic Formula stiffness factor"})
    C: float = field(default=1.5, metadata={"doc": "-; Magic Formula shape factor, > 1"})
    D: float = field(default=0.9, metadata={"doc": "-; peak friction coefficient, (0, 1.2]"})
    lf: float = field(default=1.01, metadata={"doc": "m; C.O.G to front axle"})
    lr: float = field(default=1.452, metadata={"doc": "m; C.O.G to rear axle"})
    h: float = field(default=0.55, metadata={"doc": "m; C.O.G height"})
    R: float = field(default=0.3, metadata={"doc": "m; wheel radius"})
    I: float = field(default=0.6, metadata={"doc": "kg m^2; wheel moment of inertia"})  # noqa: E741
    Iz: float = field(
        default=1027.8,
        metadata={"doc": "kg m^2; yaw inertia, accepted but unused in straight-line motion"},
    )

    def __post_init__(self) -> None:
        for f in (
            "m_veh",
            "g",
            "B",
            "C",
            "D",
            "lf",
            "lr",
            "h",
            "R",
            "I",
            "Iz",
        ):
            value = getattr(self, f)
            if not (math.isfinite(value) and value > 0):
                msg = f"must be finite and strictly positive, got {value!r}"
                raise InvalidParameter(msg, field=f)
        if self.D > 1.2:
            msg = f"must be in (0, 1.2], got {self.D!r}"
            raise InvalidParameter(msg, field="D")
        if self.C <= 1:
            msg = f"must be > 1 for the friction curve to peak, got {self.C!r}"
            raise InvalidParameter(msg, field="C")

    @property
    def weight(self) -> float:
        return self.m_veh * self.g

    @property
    def wheelbase(self) -> float:
        return self.lf + self.lr

    @property
    def peak_slip(self) -> float:
        """Theoretical slip at which the Magic Formula reaches its peak ``D``."""
        return math.tan(math.pi / (2 * self.C)) / abs(self.B)

    @property
    def peak_practical_slip(self) -> float:
        s = self.peak_slip
        return s / (1 + s)

    @property
    def static_loads(self) -> AxleLoads:
        return axle_loads(0.0, 0.0, self)


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Body position and speed plus front/rear wheel rotational speeds."""

    x: float
    v: float
    omega_f: float
    omega_r: float

    def __post_init__(self) -> None:
        for f in ("x", "v", "omega_f", "omega_r"):
            if not math.isfinite(getattr(self, f)):
                msg = "must be finite"
                raise InvalidParameter(msg, field=f)
        for f in ("v", "omega_f", "omega_r"):
            if getattr(self, f) < 0:
                msg = "must be non-negative"
                raise InvalidParameter(msg, field=f)

    @classmethod
    def rolling(cls, v: float, params: VehicleParams, x: float = 0.0) -> VehicleState:
        """A state with both wheels free-rolling at body speed ``v``."""
        return cls(x=x, v=v, omega_f=v / params.R, omega_r=v / params.R)


@dataclass(frozen=True, slots=True)
class StateDerivative:
    x_dot: float
    v_dot: float
    omega_f_dot: float
    omega_r_dot: float


@dataclass(frozen=True, slots=True)
class AxleLoads:
    """Normal loads in N on the front and rear axle."""

    fFz: float
    fRz: float

    @property
    def total(self) -> float:
        return self.fFz + self.fRz

    @property
    def shares(self) -> tuple[float, float]:
        """Each axle's fraction of the total normal load."""
        total = self.total
        return self.fFz / total, self.fRz / total


@dataclass(frozen=True, slots=True)
class TireForces:
    """Longitudinal friction forces (N) and coefficients; negative under braking."""

    fFx: float
    fRx: float
    mu_Fx: float
    mu_Rx: float

    @property
    def total(self) -> float:
        return self.fFx + self.fRx


def practical_slip(v: float, omega: float, R: float) -> float:
    """Practical slip ``(v - omega R) / |v|``: 0 when free rolling, 1 when locked."""
    if abs(v) <= V_EPS:
        msg = f"practical slip is undefined at |v| = {abs(v)!r} <= {V_EPS} m/s"
        raise SlipUndefined(msg)
    return (v - omega * R) / abs(v)


def theoretical_slip(lam: float) -> float:
    """Convert practical slip to the Magic Formula's theoretical slip ``lam / (1 - lam)``.

    Locked and nearly locked wheels clamp to ``S_MAX``. Negative (traction) slip passes
    through the same relation.
    """
    if lam >= 1:
        return S_MAX
    return min(lam / (1 - lam), S_MAX)


def pacejka_mu(s: float, params: VehicleParams) -> float:
    return params.D * math.sin(params.C * math.atan(params.B * s))


def axle_loads(mu_Fx: float, mu_Rx: float, params: VehicleParams) -> AxleLoads:
    """Normal loads under longitudinal load transfer for the given friction coefficients."""
    weight = params.weight
    denominator = params.lf + params.lr + params.h * (mu_Fx - mu_Rx)
    if denominator <= 0:
        msg = f"load-transfer denominator is {denominator!r} for mu_Fx={mu_Fx!r}, mu_Rx={mu_Rx!r}"
        raise ModelValidityError(msg)
    fFz = (params.lr * weight - params.h * weight * mu_Rx) / denominator
    fRz = weight - fFz
    if fFz <= 0 or fRz <= 0:
        msg = f"axle loads left the physical range: fFz={fFz!r}, fRz={fRz!r}"
        raise ModelValidityError(msg)
    return AxleLoads(fFz=fFz, fRz=fRz)


def _friction(v: float, omega: float, params: VehicleParams) -> float:
    return -pacejka_mu(theoretical_slip((v - omega * params.R) / abs(v)), params)


def wheel_slips(state: VehicleState, params: VehicleParams) -> tuple[float, float]:
    """Front and rear practical slip, or zeros on the kinematic stop path."""
    if state.v <= V_EPS:
        return 0.0, 0.0
    return (
        practical_slip(state.v, state.omega_f, params.R),
        practical_slip(state.v, state.omega_r, params.R),
    )


def tire_forces(state: VehicleState, params: VehicleParams) -> tuple[AxleLoads, TireForces]:
    """Axle loads and friction forces for a state; static loads and no forces near standstill."""
    if state.v <= V_EPS:
        return params.static_loads, TireForces(0.0, 0.0, 0.0, 0.0)
    mu_f = _friction(state.v, state.omega_f, params)
    mu_r = _friction(state.v, state.omega_r, params)
    loads = axle_loads(mu_f, mu_r, params)
    return loads, TireForces(
        fFx=mu_f * loads.fFz,
        fRx=mu_r * loads.fRz,
        mu_Fx=mu_f,
        mu_Rx=mu_r,
    )


def derivative(
    v: float,
    omega_f: float,
    omega_r: float,
    torque_f: float,
    torque_r: float,
    params: VehicleParams,
) -> tuple[float, float, float, float]:
    """Scalar right-hand side used by the integrator; see :func:`state_derivative`."""
    if v <= V_EPS:
        v_dot = (torque_f + torque_r) / (params.m_veh * params.R)
        omega_dot = v_dot / params.R
        return v, v_dot, omega_dot, omega_dot

    mu_f = _friction(v, omega_f, params)
    mu_r = _friction(v, omega_r, params)
    loads = axle_loads(mu_f, mu_r, params)
    f_f = mu_f * loads.fFz
    f_r = mu_r * loads.fRz
    result = (
        v,
        (f_f + f_r) / params.m_veh,
        (torque_f - f_f * params.R) / params.I,
        (torque_r - f_r * params.R) / params.I,
    )
    if not all(math.isfinite(d) for d in result):
        msg = f"non-finite state derivative {result!r} at v={v!r}, omega=({omega_f!r}, {omega_r!r})"
        raise ModelValidityError(msg)
    return result


def state_derivative(
    state: VehicleState,
    cmd: ControlCommand,
    params: VehicleParams,
) -> StateDerivative:
    """Time derivative of the plant state under a held torque command.

    At or below ``V_EPS`` the wheels roll with the body and the commanded torque acts
    directly on the vehicle mass through the wheel radius.
    """
    return StateDerivative(
        *derivative(state.v, state.omega_f, state.omega_r, cmd.torque_f, cmd.torque_r, params)
    )


def slip_rate(v: float, omega: float, v_dot: float, omega_dot: float, R: float) -> float:
    """Instantaneous rate of change of practical slip for ``v > V_EPS``."""
    return -omega_dot * R / v + omega * R * v_dot / (v * v)
