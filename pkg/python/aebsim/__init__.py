"""aebsim: a deterministic longitudinal simulator for hierarchical emergency braking control."""

from aebsim._errors import (
    AebException,
    ConfigError,
    InvalidParameter,
    ModelValidityError,
    RiccatiError,
    SchedulingError,
    SlipUndefined,
)
from aebsim.command import ControlCommand, Controller, ControllerMode
from aebsim.config import dump_config, load_config, write_config
from aebsim.lqr import (
    GainSchedule,
    LqrController,
    LqrWeights,
    ReferenceTrajectory,
    build_gain_schedule,
    linearize,
    reference_trajectory,
)
from aebsim.riccati import CareProblem, CareSolution, Matrix, solve_care
from aebsim.simulation import (
    Scenario,
    SimulationConfig,
    SimulationResult,
    SimulationSettings,
    integrate_step,
    lead_vehicle_step,
    run_scenario,
)
from aebsim.smc import SlidingModeController, SmcParams, slip_target_from_decel
from aebsim.speed_regulator import PidGains, SpeedRegulator
from aebsim.supervisor import (
    SupervisorInputs,
    SupervisorOutput,
    SupervisorSettings,
    rbsc_step,
    switch_mode,
    switching_algorithm,
)
from aebsim.trace import Interval, RunMetrics, TraceRecord, compute_metrics
from aebsim.vehicle import (
    S_MAX,
    V_EPS,
    AxleLoads,
    StateDerivative,
    TireForces,
    VehicleParams,
    VehicleState,
    axle_loads,
    pacejka_mu,
    practical_slip,
    state_derivative,
    theoretical_slip,
)
from aebsim.verify import CheckResult, run_checks

__all__ = [
    "S_MAX",
    "V_EPS",
    "AebException",
    "AxleLoads",
    "CareProblem",
    "CareSolution",
    "CheckResult",
    "ConfigError",
    "ControlCommand",
    "Controller",
    "ControllerMode",
    "GainSchedule",
    "Interval",
    "InvalidParameter",
    "LqrController",
    "LqrWeights",
    "Matrix",
    "ModelValidityError",
    "PidGains",
    "ReferenceTrajectory",
    "RiccatiError",
    "RunMetrics",
    "Scenario",
    "SchedulingError",
    "SimulationConfig",
    "SimulationResult",
    "SimulationSettings",
    "SlidingModeController",
    "SlipUndefined",
    "SmcParams",
    "SpeedRegulator",
    "StateDerivative",
    "SupervisorInputs",
    "SupervisorOutput",
    "SupervisorSettings",
    "TireForces",
    "TraceRecord",
    "VehicleParams",
    "VehicleState",
    "axle_loads",
    "build_gain_schedule",
    "compute_metrics",
    "dump_config",
    "integrate_step",
    "lead_vehicle_step",
    "linearize",
    "load_config",
    "pacejka_mu",
    "practical_slip",
    "rbsc_step",
    "reference_trajectory",
    "run_checks",
    "run_scenario",
    "slip_target_from_decel",
    "solve_care",
    "state_derivative",
    "switch_mode",
    "switching_algorithm",
    "theoretical_slip",
    "write_config",
]
