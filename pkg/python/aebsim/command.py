"""Controller modes and the per-tick torque command handed to the plant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum

from aebsim._errors import InvalidParameter


class ControllerMode(StrEnum):
    """The low-level controller that owns the axle torques on a given tick."""

    WheelSlipControl = "WheelSlipControl"
    SpeedRegulation = "SpeedRegulation"
    Standstill = "Standstill"


class Controller(StrEnum):
    """Which wheel-slip controller runs while an emergency is active."""

    SMC = "smc"
    LQR = "lqr"


@dataclass(frozen=True, slots=True)
class ControlCommand:
    """Front and rear axle torques in N·m (negative brakes) plus the mode that produced them."""

    torque_f: float
    torque_r: float
    mode: ControllerMode

    def __post_init__(self) -> None:
        for name in ("torque_f", "torque_r"):
            if not math.isfinite(getattr(self, name)):
                msg = "torque must be finite"
                raise InvalidParameter(msg, field=name)

    @property
    def total(self) -> float:
        return self.torque_f + self.torque_r
