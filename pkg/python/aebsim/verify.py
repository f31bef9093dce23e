"""Built-in verification suites run by ``aebsim verify``.

Each suite returns a :class:`CheckResult`; none of them raise on a failed check.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, replace

import numpy as np

from aebsim._errors import AebException
from aebsim.command import Controller, ControllerMode
from aebsim.lqr import axle_masses, axle_model_derivative, linearize
from aebsim.riccati import CareProblem, Matrix, solve_care
from aebsim.simulation import SimulationConfig, run_scenario
from aebsim.vehicle import VehicleParams, practical_slip

logger = logging.getLogger(__name__)

JACOBIAN_POINTS = 100
JACOBIAN_TOLERANCE = 1e-4
CARE_INSTANCES = 1000
LYAPUNOV_TOLERANCE = 1e-12
SEED = 20240607


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _finite_difference_jacobian(
    v: float,
    omega: float,
    torque: float,
    axle_mass: float,
    params: VehicleParams,
) -> Matrix:
    jacobian = np.empty((2, 2))
    for column, (dv, domega) in enumerate(((1.0, 0.0), (0.0, 1.0))):
        step = 1e-6 * max(1.0, abs(v) if dv else abs(omega))
        hi = axle_model_derivative(v + step * dv, omega + step * domega, torque, axle_mass, params)
        lo = axle_model_derivative(v - step * dv, omega - step * domega, torque, axle_mass, params)
        jacobian[:, column] = (np.asarray(hi) - np.asarray(lo)) / (2 * step)
    return jacobian


def _finite_difference_slip_map(v: float, omega: float, params: VehicleParams) -> Matrix:
    def slip(dv: float, domega: float) -> float:
        return practical_slip(v + dv, omega + domega, params.R)

    v_step = 1e-6 * max(1.0, abs(v))
    omega_step = 1e-6 * max(1.0, abs(omega))
    return np.array(
        [
            [
                (slip(v_step, 0.0) - slip(-v_step, 0.0)) / (2 * v_step),
                (slip(0.0, omega_step) - slip(0.0, -omega_step)) / (2 * omega_step),
            ]
        ]
    )


def _relative_error(analytic: Matrix, numeric: Matrix) -> float:
    return float(np.max(np.abs(analytic - numeric))) / float(np.max(np.abs(numeric)))


def check_jacobian(params: VehicleParams, points: int = JACOBIAN_POINTS) -> CheckResult:
    """Analytic LQR design Jacobians against central differences.

    Checks the state matrix against the design model and the slip output map against
    ``lam = 1 - omega R / v``.
    """
    rng = np.random.default_rng(SEED)
    worst_a = worst_c = 0.0
    for _ in range(points):
        v = float(rng.uniform(1.0, 40.0))
        lam = float(rng.uniform(0.0, 0.5))
        decel = float(rng.uniform(-params.D * params.g, 0.0))
        axle_mass = axle_masses(decel, params)[int(rng.integers(2))]
        omega = v * (1 - lam) / params.R
        plant = linearize(v, omega, axle_mass, params)
        jacobian = _finite_difference_jacobian(v, omega, 0.0, axle_mass, params)
        slip_map = _finite_difference_slip_map(v, omega, params)
        worst_a = max(worst_a, _relative_error(plant.A, jacobian))
        worst_c = max(worst_c, _relative_error(plant.C_out, slip_map))
    return CheckResult(
        name="jacobian",
        passed=max(worst_a, worst_c) <= JACOBIAN_TOLERANCE,
        detail=(
            f"{points} points, worst relative error {worst_a:.2e} in A, {worst_c:.2e} in C_out"
        ),
    )


def random_care_problem(rng: np.random.Generator) -> CareProblem:
    """A random stable 2x2 system with one input, ``Q = M'M`` and ``R = I``."""
    A = rng.normal(size=(2, 2))
    A -= (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 2.0)) * np.eye(2)
    M = rng.normal(size=(2, 2))
    return CareProblem(A=A, B=rng.normal(size=(2, 1)), Q=M.T @ M, R=np.eye(1))


def _care_failure(problem: CareProblem) -> str | None:
    try:
        solution = solve_care(problem)
    except AebException as e:
        return str(e)
    P = solution.P
    if np.linalg.norm(P - P.T) >= 1e-10 * max(float(np.linalg.norm(P)), 1.0):
        return "P is not symmetric"
    if np.min(np.linalg.eigvalsh(P)) < -1e-10 * max(float(np.linalg.norm(P)), 1.0):
        return "P is not positive semidefinite"
    return None


def check_care(instances: int = CARE_INSTANCES) -> CheckResult:
    """Random stabilizable instances plus the double integrator with known gain."""
    rng = np.random.default_rng(SEED)
    failures = []
    for i in range(instances):
        reason = _care_failure(random_care_problem(rng))
        if reason is not None:
            failures.append(f"instance {i}: {reason}")

    double_integrator = CareProblem(
        A=np.array([[0.0, 1.0], [0.0, 0.0]]),
        B=np.array([[0.0], [1.0]]),
        Q=np.eye(2),
        R=np.eye(1),
    )
    K = solve_care(double_integrator).K
    if not np.allclose(K, [[1.0, math.sqrt(3)]], rtol=0, atol=1e-9):
        failures.append(f"double integrator gain {K.tolist()}")

    detail = f"{instances} random instances and the double integrator"
    if failures:
        detail = f"{len(failures)} failures, first: {failures[0]}"
    return CheckResult(name="care", passed=not failures, detail=detail)


def check_lyapunov(config: SimulationConfig) -> CheckResult:
    """``s * ds/dt <= 0`` on every wheel-slip-control tick outside the boundary layer."""
    config = replace(config, scenario=replace(config.scenario, controller=Controller.SMC))
    trace = run_scenario(config).trace
    delta = config.smc.boundary_layer
    checked = 0
    worst = -math.inf
    for record in trace:
        if record.mode is not ControllerMode.WheelSlipControl:
            continue
        for s, rate in ((record.s_f, record.slip_rate_f), (record.s_r, record.slip_rate_r)):
            if abs(s) > delta:
                checked += 1
                worst = max(worst, s * rate)
    if not checked:
        return CheckResult(
            name="lyapunov",
            passed=True,
            detail="no emergency tick left the boundary layer",
        )
    return CheckResult(
        name="lyapunov",
        passed=worst <= LYAPUNOV_TOLERANCE,
        detail=f"{checked} samples outside the boundary layer, max s*ds/dt {worst:.3e}",
    )


def check_pacejka(B: float, C: float, D: float) -> CheckResult:
    """The friction curve peaks at ``+D`` at ``tan(pi / 2C) / |B|``.

    Takes raw coefficients so that sign errors, which :class:`VehicleParams` rejects, can
    still be diagnosed.
    """
    s_peak = math.tan(math.pi / (2 * C)) / abs(B)
    s = np.linspace(0.0, 1.0, 10_001)
    curve = D * np.sin(C * np.arctan(B * s))
    at_peak = D * math.sin(C * math.atan(B * s_peak))
    passed = math.isclose(at_peak, D, rel_tol=1e-12) and float(np.max(curve)) <= at_peak + 1e-12
    return CheckResult(
        name="pacejka",
        passed=passed,
        detail=f"mu({s_peak:.5f}) = {at_peak:.9g}, curve max {float(np.max(curve)):.9g}",
    )


SUITES: dict[str, Callable[[SimulationConfig], CheckResult]] = {
    "jacobian": lambda config: check_jacobian(config.vehicle),
    "care": lambda config: check_care(),
    "lyapunov": check_lyapunov,
    "pacejka": lambda config: check_pacejka(config.vehicle.B, config.vehicle.C, config.vehicle.D),
}


def run_checks(config: SimulationConfig, only: str | None = None) -> list[CheckResult]:
    if only is not None and only not in SUITES:
        msg = f"unknown suite {only!r}; choose from {', '.join(SUITES)}"
        raise ValueError(msg)
    results = []
    for name, suite in SUITES.items():
        if only is not None and name != only:
            continue
        logger.info("Running %s checks", name)
        results.append(suite(config))
    return results


def format_results(results: Iterable[CheckResult]) -> str:
    rows = [(r.name, "PASS" if r.passed else "FAIL", r.detail) for r in results]
    width = max((len(name) for name, _, _ in rows), default=0)
    return "".join(f"{name.ljust(width)}  {status}  {detail}\n" for name, status, detail in rows)
