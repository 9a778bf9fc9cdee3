"""Control laws: bang-bang, P, PD, PID, and fractional-order PID.

Each law maps (reference, measured state) to a commanded torque. Stateful
laws (PID integral, FPID error history) thread a ControllerState value;
given the same spec, state, and inputs they are fully deterministic, so a
recorded input log replays bit-exactly.

Sign conventions: error e = r - theta; derivative action uses -kd*omega
(no reference-derivative term, so reference discontinuities do not kick
the torque); integral accumulates +ki*e*dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

from .fracops import SampleWindow, frac_derivative, frac_integral

DEFAULT_FPID_MEMORY = 2000


@dataclass(frozen=True)
class TorqueLimits:
    """Actuator saturation bounds [N*m]."""

    tau_min: float = -5.0
    tau_max: float = 5.0

    def __post_init__(self):
        if not self.tau_min < self.tau_max:
            raise ValueError(f"tau_min must be below tau_max, got [{self.tau_min}, {self.tau_max}]")


@dataclass(frozen=True)
class BangBang:
    tau_max: float = 5.0
    dead_band: float = 0.0  # |e| below this commands zero torque

    def __post_init__(self):
        if not self.tau_max > 0:
            raise ValueError(f"tau_max must be positive, got {self.tau_max}")
        if self.dead_band < 0:
            raise ValueError("dead_band must be non-negative")


@dataclass(frozen=True)
class P:
    kp: float = 2.0

    def __post_init__(self):
        if self.kp < 0:
            raise ValueError("kp must be non-negative")


@dataclass(frozen=True)
class PD:
    kp: float = 2.0
    kd: float = 0.2

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")


@dataclass(frozen=True)
class PID:
    kp: float = 2.0
    ki: float = 1.0
    kd: float = 0.2
    # optional integrator clamp |sigma| <= sigma_limit; None disables it
    sigma_limit: float | None = None

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if self.sigma_limit is not None and self.sigma_limit <= 0:
            raise ValueError("sigma_limit must be positive when set")


@dataclass(frozen=True)
class FPID:
    kp: float = 2.0
    ki: float = 1.0
    kd: float = 0.2
    lam: float = 0.5  # fractional integral order
    mu: float = 0.5  # fractional derivative order
    memory: int = DEFAULT_FPID_MEMORY  # short-memory truncation, in samples

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if not (0 < self.lam < 1) or not (0 < self.mu < 1):
            raise ValueError("fractional orders must lie in (0, 1)")
        if self.memory < 1:
            raise ValueError("memory must be at least one sample")


ControllerSpec = Union[BangBang, P, PD, PID, FPID]


@dataclass
class ControllerState:
    """Internal controller memory.

    sigma          PID integral accumulator [N*m]
    error_history  recent e = r - theta samples for the FPID operators
    history_dt     spacing the history was recorded at; must match the loop dt
    """

    sigma: float = 0.0
    error_history: list[float] = field(default_factory=list)
    history_dt: float | None = None

    def copy(self) -> "ControllerState":
        return ControllerState(
            sigma=self.sigma,
            error_history=list(self.error_history),
            history_dt=self.history_dt,
        )


def initial_state() -> ControllerState:
    return ControllerState()


def saturate(tau: float, limits: TorqueLimits) -> float:
    """Clamp the commanded torque to the actuator range."""
    return min(max(tau, limits.tau_min), limits.tau_max)


def bang_bang(r: float, theta: float, tau_max: float, dead_band: float = 0.0) -> float:
    """Signum control: tau_max * sgn(r - theta), with sgn(0) = 0."""
    e = r - theta
    if abs(e) <= dead_band:
        return 0.0
    return math.copysign(tau_max, e) if e != 0.0 else 0.0


def p_control(kp: float, r: float, theta: float) -> float:
    return kp * (r - theta)


def pd_control(kp: float, kd: float, r: float, theta: float, omega: float) -> float:
    return kp * (r - theta) - kd * omega


def pid_step(
    spec: PID,
    cstate: ControllerState,
    r: float,
    theta: float,
    omega: float,
    dt: float,
) -> tuple[float, ControllerState]:
    """One PID evaluation; the integral advances by explicit Euler."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sigma = cstate.sigma + spec.ki * (r - theta) * dt
    if spec.sigma_limit is not None:
        sigma = min(max(sigma, -spec.sigma_limit), spec.sigma_limit)
    tau = spec.kp * (r - theta) + sigma - spec.kd * omega
    return tau, replace(cstate, sigma=sigma)


def fpid_step(
    spec: FPID,
    cstate: ControllerState,
    r: float,
    theta: float,
    omega: float,
    dt: float,
) -> tuple[float, ControllerState]:
    """One FPID evaluation over the truncated error history.

    Both the fractional integral and derivative act on e = r - theta, so a
    moving reference enters the derivative path as well.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if cstate.history_dt is not None and cstate.history_dt != dt:
        raise ValueError(
            f"history spacing {cstate.history_dt} does not match controller dt {dt}"
        )
    history = cstate.error_history + [r - theta]
    if len(history) > spec.memory:
        history = history[-spec.memory :]
    window = SampleWindow(samples=history, dt=dt)
    tau = (
        spec.kp * (r - theta)
        + spec.ki * frac_integral(window, spec.lam)
        + spec.kd * frac_derivative(window, spec.mu)
    )
    return tau, ControllerState(sigma=cstate.sigma, error_history=history, history_dt=dt)


def compute_torque(
    spec: ControllerSpec,
    cstate: ControllerState,
    r: float,
    theta: float,
    omega: float,
    dt: float,
) -> tuple[float, ControllerState]:
    """Dispatch on the controller spec; returns (torque, next state)."""
    if isinstance(spec, BangBang):
        return bang_bang(r, theta, spec.tau_max, spec.dead_band), cstate
    if isinstance(spec, P):
        return p_control(spec.kp, r, theta), cstate
    if isinstance(spec, PD):
        return pd_control(spec.kp, spec.kd, r, theta, omega), cstate
    if isinstance(spec, PID):
        return pid_step(spec, cstate, r, theta, omega, dt)
    if isinstance(spec, FPID):
        return fpid_step(spec, cstate, r, theta, omega, dt)
    raise TypeError(f"unknown controller spec: {spec!r}")
