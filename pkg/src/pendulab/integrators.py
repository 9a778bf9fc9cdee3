"""Fixed-step explicit integrators with zero-order-hold torque.

The commanded torque is held constant over the whole step (and across all
four RK4 stages); the controller runs once per step, before the step.
"""

from __future__ import annotations

from enum import Enum
from typing import Callable

from .dynamics import PendulumParams, SimState, StateDeriv

MAX_DT = 0.1
DEFAULT_DT = 1e-3
# Large integral gains can blow the state up; fail loudly instead of hanging.
OMEGA_DIVERGENCE_LIMIT = 1e6

RhsFn = Callable[[PendulumParams, SimState, float], StateDeriv]


class IntegratorKind(str, Enum):
    EULER = "euler"
    RK4 = "rk4"


class IntegrationDivergedError(RuntimeError):
    """Raised when a step produces a non-finite or runaway state."""

    def __init__(self, state: SimState):
        self.state = state
        super().__init__(
            f"integration diverged at t={state.t}: theta={state.theta}, omega={state.omega}"
        )


def validate_dt(dt: float) -> float:
    if not (0 < dt <= MAX_DT):
        raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
    return dt


def _check(state: SimState) -> SimState:
    if not state.is_finite() or abs(state.omega) > OMEGA_DIVERGENCE_LIMIT:
        raise IntegrationDivergedError(state)
    return state


def euler_step(rhs: RhsFn, params: PendulumParams, state: SimState, tau: float, dt: float) -> SimState:
    """Explicit Euler step."""
    d = rhs(params, state, tau)
    return _check(
        SimState(
            theta=state.theta + dt * d.dtheta,
            omega=state.omega + dt * d.domega,
            t=state.t + dt,
        )
    )


def rk4_step(rhs: RhsFn, params: PendulumParams, state: SimState, tau: float, dt: float) -> SimState:
    """Classical fourth-order Runge-Kutta step (weights 1/6, 1/3, 1/3, 1/6)."""
    k1 = rhs(params, state, tau)
    s2 = SimState(state.theta + 0.5 * dt * k1.dtheta, state.omega + 0.5 * dt * k1.domega, state.t)
    k2 = rhs(params, s2, tau)
    s3 = SimState(state.theta + 0.5 * dt * k2.dtheta, state.omega + 0.5 * dt * k2.domega, state.t)
    k3 = rhs(params, s3, tau)
    s4 = SimState(state.theta + dt * k3.dtheta, state.omega + dt * k3.domega, state.t)
    k4 = rhs(params, s4, tau)
    return _check(
        SimState(
            theta=state.theta + dt / 6.0 * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta),
            omega=state.omega + dt / 6.0 * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega),
            t=state.t + dt,
        )
    )


_STEPPERS = {IntegratorKind.EULER: euler_step, IntegratorKind.RK4: rk4_step}


def stepper_for(kind: IntegratorKind):
    return _STEPPERS[IntegratorKind(kind)]
