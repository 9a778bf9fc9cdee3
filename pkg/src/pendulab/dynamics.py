"""Pendulum equations of motion (nonlinear and linearized) and energies.

Model: an actuated point mass on a rigid massless rod with viscous friction,

    J th'' + b th' + m g l sin(th) = tau,    J = m l^2.

All functions here are pure and operate on plain value types; they are safe
to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PendulumParams:
    """Physical constants of the pendulum.

    m    mass [kg]
    ell  rod length [m]
    g    gravity [m/s^2]
    b    viscous friction coefficient [N*m*s/rad]
    """

    m: float = 0.2
    ell: float = 0.20
    g: float = 9.81
    b: float = 0.0

    def __post_init__(self):
        if not (self.m > 0):
            raise ValueError(f"mass must be positive, got {self.m}")
        if not (self.ell > 0):
            raise ValueError(f"rod length must be positive, got {self.ell}")
        if not (self.g > 0):
            raise ValueError(f"gravity must be positive, got {self.g}")
        if self.b < 0:
            raise ValueError(f"friction must be non-negative, got {self.b}")


@dataclass
class SimState:
    """Continuous state: angle [rad], angular velocity [rad/s], time [s].

    theta is kept unwrapped (not reduced mod 2*pi) so integral and error
    signals stay continuous; renderers wrap it for display.
    """

    theta: float = 0.0
    omega: float = 0.0
    t: float = 0.0

    def is_finite(self) -> bool:
        return math.isfinite(self.theta) and math.isfinite(self.omega) and math.isfinite(self.t)


@dataclass(frozen=True)
class StateDeriv:
    """First-order form of the state derivative."""

    dtheta: float  # [rad/s]
    domega: float  # [rad/s^2]


def inertia(params: PendulumParams) -> float:
    """Moment of inertia about the pivot, J = m*ell^2 [kg*m^2]."""
    return params.m * params.ell * params.ell


def gravity_scale(params: PendulumParams) -> float:
    """Gravity-torque scale m*g*ell [N*m]."""
    return params.m * params.g * params.ell


def gravity_torque(params: PendulumParams, theta: float) -> float:
    """Restoring gravity torque magnitude m*g*ell*sin(theta) [N*m]."""
    return gravity_scale(params) * math.sin(theta)


def nonlinear_rhs(params: PendulumParams, state: SimState, tau: float) -> StateDeriv:
    """Full nonlinear dynamics: domega = (tau - b*omega - m*g*l*sin(th)) / J."""
    domega = (tau - params.b * state.omega - gravity_torque(params, state.theta)) / inertia(params)
    return StateDeriv(dtheta=state.omega, domega=domega)


def linear_rhs(params: PendulumParams, state: SimState, tau: float) -> StateDeriv:
    """Small-angle model (sin th -> th), same friction and torque terms."""
    domega = (tau - params.b * state.omega - gravity_scale(params) * state.theta) / inertia(params)
    return StateDeriv(dtheta=state.omega, domega=domega)


def total_energy(params: PendulumParams, state: SimState) -> float:
    """Kinetic plus potential energy: 0.5*J*omega^2 - m*g*l*cos(theta) [J]."""
    return 0.5 * inertia(params) * state.omega**2 - gravity_scale(params) * math.cos(state.theta)
