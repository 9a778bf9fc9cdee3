"""pendulab: an interactive pendulum control laboratory.

Deterministic simulation of the actuated, damped pendulum with a pluggable
controller stack (bang-bang, P, PD, PID, fractional-order PID), energy and
equilibrium diagnostics, a batch CLI, and a real-time telemetry server.
"""

from .config import Pacing, ScenarioConfig, SessionMode, parse_scenario_text
from .controllers import FPID, PD, PID, BangBang, ControllerState, P, TorqueLimits
from .dynamics import PendulumParams, SimState
from .integrators import IntegratorKind
from .session import Outcome, Session, SessionRecord, TelemetryFrame, run_headless, to_csv
from .signals import (
    ConstantDisturbance,
    ConstantReference,
    JoystickReference,
    NoDisturbance,
    NoiseSpec,
    SineDisturbance,
    SineReference,
)

__version__ = "0.1.0"

__all__ = [
    "BangBang",
    "ConstantDisturbance",
    "ConstantReference",
    "ControllerState",
    "FPID",
    "IntegratorKind",
    "JoystickReference",
    "NoDisturbance",
    "NoiseSpec",
    "Outcome",
    "P",
    "PD",
    "PID",
    "Pacing",
    "PendulumParams",
    "ScenarioConfig",
    "Session",
    "SessionMode",
    "SessionRecord",
    "SimState",
    "SineDisturbance",
    "SineReference",
    "TelemetryFrame",
    "TorqueLimits",
    "parse_scenario_text",
    "run_headless",
    "to_csv",
]
