import math

import numpy as np
import pytest

import aebsim
from aebsim.command import ControllerMode
from aebsim.vehicle import S_MAX, V_EPS, slip_rate, tire_forces, wheel_slips


def rolling_command(torque_f: float = 0.0, torque_r: float = 0.0) -> aebsim.ControlCommand:
    return aebsim.ControlCommand(torque_f, torque_r, ControllerMode.WheelSlipControl)


def slipping_state(v: float, lam_f: float, lam_r: float, R: float = 0.3) -> aebsim.VehicleState:
    return aebsim.VehicleState(x=0.0, v=v, omega_f=v * (1 - lam_f) / R, omega_r=v * (1 - lam_r) / R)


# --- VehicleParams ---


def test_vehicle_params_defaults() -> None:
    p = aebsim.VehicleParams()
    assert (p.m_veh, p.g, p.B, p.C, p.D) == (1420.0, 9.81, 24.0, 1.5, 0.9)
    assert (p.lf, p.lr, p.h, p.R, p.I) == (1.01, 1.452, 0.55, 0.3, 0.6)
    assert p.Iz == 1027.8


def test_vehicle_params_derived(params: aebsim.VehicleParams) -> None:
    assert params.weight == pytest.approx(13930.2)
    assert params.wheelbase == pytest.approx(2.462)
    assert params.peak_slip == pytest.approx(0.07217, abs=1e-5)
    assert params.peak_practical_slip == pytest.approx(0.06731, abs=1e-5)


@pytest.mark.parametrize(
    ("field", "value"),
    [
        ("m_veh", 0.0),
        ("R", -0.3),
        ("I", math.nan),
        ("Iz", math.inf),
        ("D", 1.3),
        ("C", 1.0),
    ],
    ids=["zero-mass", "negative-radius", "nan-inertia", "infinite-yaw-inertia", "D", "C"],
)
def test_vehicle_params_rejects(field: str, value: float) -> None:
    with pytest.raises(aebsim.InvalidParameter) as exc_info:
        aebsim.VehicleParams(**{field: value})
    assert exc_info.value.field == field


def test_vehicle_params_frozen(params: aebsim.VehicleParams) -> None:
    with pytest.raises(AttributeError):
        params.m_veh = 1000.0  # type: ignore[misc]


# --- VehicleState ---


def test_vehicle_state_rolling(params: aebsim.VehicleParams) -> None:
    state = aebsim.VehicleState.rolling(30.0, params, x=5.0)
    assert state.x == 5.0
    assert state.omega_f == state.omega_r == pytest.approx(100.0)


@pytest.mark.parametrize("field", ["v", "omega_f", "omega_r"])
def test_vehicle_state_rejects_negative(field: str) -> None:
    values = {"x": 0.0, "v": 1.0, "omega_f": 1.0, "omega_r": 1.0, field: -1.0}
    with pytest.raises(aebsim.InvalidParameter) as exc_info:
        aebsim.VehicleState(**values)
    assert exc_info.value.field == field


def test_control_command_rejects_non_finite_torque() -> None:
    with pytest.raises(aebsim.InvalidParameter) as exc_info:
        aebsim.ControlCommand(math.nan, 0.0, ControllerMode.SpeedRegulation)
    assert exc_info.value.field == "torque_f"


def test_control_command_total() -> None:
    assert rolling_command(-100.0, -50.0).total == -150.0


# --- practical and theoretical slip ---


@pytest.mark.parametrize(
    ("v", "omega", "expected"),
    [
        (30.0, 100.0, 0.0),
        (30.0, 0.0, 1.0),
        (27.778, 83.33, 0.10),
    ],
    ids=["free-rolling", "locked", "ten-percent"],
)
def test_practical_slip(v: float, omega: float, expected: float) -> None:
    assert aebsim.practical_slip(v, omega, 0.3) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize("v", [0.0, 0.05, V_EPS, -0.05])
def test_practical_slip_undefined_near_standstill(v: float) -> None:
    with pytest.raises(aebsim.SlipUndefined):
        aebsim.practical_slip(v, 0.0, 0.3)


@pytest.mark.parametrize(
    ("lam", "expected"),
    [
        (0.0, 0.0),
        (0.5, 1.0),
        (0.10, 0.1111),
        (-0.25, -0.2),
    ],
    ids=["zero", "half", "ten-percent", "traction"],
)
def test_theoretical_slip(lam: float, expected: float) -> None:
    assert aebsim.theoretical_slip(lam) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("lam", [1.0, 1.5, 0.999999])
def test_theoretical_slip_clamps_locked_wheel(lam: float) -> None:
    assert aebsim.theoretical_slip(lam) == S_MAX


# --- Magic Formula ---


def test_pacejka_mu_zero(params: aebsim.VehicleParams) -> None:
    assert aebsim.pacejka_mu(0.0, params) == 0.0


def test_pacejka_mu_peak(params: aebsim.VehicleParams) -> None:
    assert aebsim.pacejka_mu(params.peak_slip, params) == pytest.approx(0.9, rel=1e-12)


def test_pacejka_mu_asymptote(params: aebsim.VehicleParams) -> None:
    assert aebsim.pacejka_mu(1e9, params) == pytest.approx(0.6364, abs=1e-4)


def test_pacejka_mu_is_odd(params: aebsim.VehicleParams) -> None:
    rng = np.random.default_rng(7)
    for s in rng.normal(scale=2.0, size=1000):
        mu = aebsim.pacejka_mu(float(s), params)
        assert aebsim.pacejka_mu(-float(s), params) == pytest.approx(-mu, abs=1e-15)


def test_pacejka_mu_bounded_by_peak(params: aebsim.VehicleParams) -> None:
    for s in np.linspace(-5.0, 5.0, 2001):
        assert abs(aebsim.pacejka_mu(float(s), params)) <= params.D + 1e-15


# --- axle loads ---


def test_axle_loads_static(params: aebsim.VehicleParams) -> None:
    loads = aebsim.axle_loads(0.0, 0.0, params)
    assert loads.fFz == pytest.approx(8215.5, abs=0.1)
    assert loads.fRz == pytest.approx(5714.7, abs=0.1)
    assert params.static_loads == loads


def test_axle_loads_transfer_forward_under_braking(params: aebsim.VehicleParams) -> None:
    braking = aebsim.axle_loads(-0.9, -0.9, params)
    assert braking.fFz > params.static_loads.fFz
    assert braking.fRz < params.static_loads.fRz


def test_axle_loads_conserve_weight(params: aebsim.VehicleParams) -> None:
    rng = np.random.default_rng(11)
    for mu_f, mu_r in rng.uniform(-0.9, 0.9, size=(500, 2)):
        loads = aebsim.axle_loads(float(mu_f), float(mu_r), params)
        assert loads.fFz > 0
        assert loads.fRz > 0
        assert loads.total == pytest.approx(13930.2, rel=1e-12)


def test_axle_loads_shares_sum_to_one(params: aebsim.VehicleParams) -> None:
    share_f, share_r = aebsim.axle_loads(-0.5, -0.7, params).shares
    assert share_f + share_r == pytest.approx(1.0, rel=1e-15)


def test_axle_loads_rejects_nonpositive_denominator(params: aebsim.VehicleParams) -> None:
    with pytest.raises(aebsim.ModelValidityError):
        aebsim.axle_loads(-3.0, 2.0, params)


# --- state derivative ---


def test_free_rolling_has_no_acceleration(params: aebsim.VehicleParams) -> None:
    state = aebsim.VehicleState.rolling(25.0, params)
    d = aebsim.state_derivative(state, rolling_command(), params)
    assert d.x_dot == 25.0
    assert d.v_dot == pytest.approx(0.0, abs=1e-9)
    assert d.omega_f_dot == pytest.approx(0.0, abs=1e-6)
    assert d.omega_r_dot == pytest.approx(0.0, abs=1e-6)


def test_peak_slip_decelerates_at_adhesion_limit(params: aebsim.VehicleParams) -> None:
    lam = params.peak_practical_slip
    d = aebsim.state_derivative(slipping_state(27.778, lam, lam), rolling_command(), params)
    assert d.v_dot == pytest.approx(-8.829, abs=1e-6)


def test_locked_wheels_decelerate_at_sliding_friction(params: aebsim.VehicleParams) -> None:
    state = aebsim.VehicleState(x=0.0, v=20.0, omega_f=0.0, omega_r=0.0)
    d = aebsim.state_derivative(state, rolling_command(), params)
    assert d.v_dot == pytest.approx(-params.g * aebsim.pacejka_mu(S_MAX, params), rel=1e-12)
    assert d.v_dot == pytest.approx(-0.6364 * 9.81, abs=1e-2)


def test_force_consistency(params: aebsim.VehicleParams) -> None:
    rng = np.random.default_rng(3)
    for v, lam_f, lam_r in zip(
        rng.uniform(1.0, 40.0, 200),
        rng.uniform(0.0, 0.99, 200),
        rng.uniform(0.0, 0.99, 200),
        strict=True,
    ):
        state = slipping_state(float(v), float(lam_f), float(lam_r))
        _, forces = tire_forces(state, params)
        d = aebsim.state_derivative(state, rolling_command(), params)
        assert forces.total == pytest.approx(params.m_veh * d.v_dot, rel=1e-12)
        assert abs(d.v_dot) <= params.D * params.g + 1e-9


def test_friction_forces_match_coefficients(params: aebsim.VehicleParams) -> None:
    loads, forces = tire_forces(slipping_state(20.0, 0.05, 0.03), params)
    assert forces.fFx == forces.mu_Fx * loads.fFz
    assert forces.fRx == forces.mu_Rx * loads.fRz
    assert forces.mu_Fx < 0
    assert forces.mu_Rx < 0


def test_wheel_torque_enters_wheel_dynamics(params: aebsim.VehicleParams) -> None:
    state = aebsim.VehicleState.rolling(20.0, params)
    d = aebsim.state_derivative(state, rolling_command(-60.0, -30.0), params)
    assert d.omega_f_dot == pytest.approx(-100.0, abs=1e-6)
    assert d.omega_r_dot == pytest.approx(-50.0, abs=1e-6)


def test_kinematic_model_below_standstill_speed(params: aebsim.VehicleParams) -> None:
    state = aebsim.VehicleState.rolling(0.05, params)
    d = aebsim.state_derivative(state, rolling_command(-100.0, -100.0), params)
    assert d.v_dot == pytest.approx(-200.0 / (1420.0 * 0.3))
    assert d.omega_f_dot == pytest.approx(d.v_dot / 0.3)
    assert wheel_slips(state, params) == (0.0, 0.0)


def test_slip_rate_vanishes_on_free_rolling() -> None:
    assert slip_rate(20.0, 20.0 / 0.3, -5.0, -5.0 / 0.3, 0.3) == pytest.approx(0.0, abs=1e-12)


def test_slip_rate_matches_finite_difference(params: aebsim.VehicleParams) -> None:
    v, omega, v_dot, omega_dot, h = 20.0, 60.0, -8.0, -40.0, 1e-7

    def lam(t: float) -> float:
        return aebsim.practical_slip(v + v_dot * t, omega + omega_dot * t, params.R)

    numeric = (lam(h) - lam(-h)) / (2 * h)
    assert slip_rate(v, omega, v_dot, omega_dot, params.R) == pytest.approx(numeric, rel=1e-6)
