import pytest

import aebsim


@pytest.fixture(scope="session")
def params() -> aebsim.VehicleParams:
    return aebsim.VehicleParams()


@pytest.fixture(scope="session")
def smc_run() -> aebsim.SimulationResult:
    return aebsim.run_scenario(aebsim.SimulationConfig())


@pytest.fixture(scope="session")
def lqr_run() -> aebsim.SimulationResult:
    scenario = aebsim.Scenario(controller=aebsim.Controller.LQR)
    return aebsim.run_scenario(aebsim.SimulationConfig(scenario=scenario))
