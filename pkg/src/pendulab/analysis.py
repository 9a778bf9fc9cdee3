"""Energy diagnostics, equilibrium predictions, and performance metrics.

These turn the closed-loop convergence arguments into executable checks:
augmented-energy functions whose sampled decrease certifies convergence,
equilibrium solvers predicting where each controller parks the pendulum,
gravity estimation from the oscillation period, and step-response metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import PendulumParams, SimState, gravity_scale, total_energy


class NotOscillatingError(ValueError):
    """Trajectory has too few zero crossings to define a period."""


class NoEquilibriumError(ValueError):
    """No sign change of the equilibrium equation inside the search window."""


@dataclass(frozen=True)
class EquilibriumPrediction:
    theta_star: float  # [rad]
    sigma_star: float | None  # [N*m]; only meaningful for integral action
    residual: float  # [N*m] equilibrium-equation residual at theta_star


@dataclass(frozen=True)
class PerfMetrics:
    overshoot: float  # [rad]
    settling_time_2pct: float | None  # [s]; None if never settled
    rms_error: float  # [rad], over the final 20% of the run
    steady_state_error: float  # [rad], mean error over the final 10%


def augmented_energy_bang(
    params: PendulumParams, state: SimState, r: float, tau_max: float
) -> float:
    """E + tau_max*|theta - r|; decreases at rate -b*omega^2 under bang-bang."""
    return total_energy(params, state) + tau_max * abs(state.theta - r)


def augmented_energy_p(params: PendulumParams, state: SimState, r: float, kp: float) -> float:
    """E + 0.5*kp*(theta - r)^2; the P/PD controller's spring potential."""
    return total_energy(params, state) + 0.5 * kp * (state.theta - r) ** 2


def bang_stabilizable_at_pi(params: PendulumParams, tau_max: float) -> bool:
    """Whether bang-bang can hold the inverted position: tau_max > m*g*l."""
    return tau_max > gravity_scale(params)


def p_equilibrium(params: PendulumParams, kp: float, r: float) -> EquilibriumPrediction:
    """Solve kp*(r - theta) = m*g*l*sin(theta) for the equilibrium angle.

    Scans [r - pi, r + pi] on a 1e-3 rad grid for sign changes, bisects each
    to |f| < 1e-10, and returns the root nearest r (multiple equilibria exist
    for large reference offsets).
    """
    if not kp > 0:
        raise ValueError(f"kp must be positive, got {kp}")
    mgl = gravity_scale(params)

    def f(theta: float) -> float:
        return kp * (r - theta) - mgl * math.sin(theta)

    lo, hi = r - math.pi, r + math.pi
    grid = np.arange(lo, hi + 1e-3, 1e-3)
    vals = kp * (r - grid) - mgl * np.sin(grid)

    roots: list[float] = []
    for i in range(len(grid) - 1):
        a, b = float(vals[i]), float(vals[i + 1])
        if a == 0.0:
            roots.append(float(grid[i]))
            continue
        if a * b < 0:
            x0, x1 = float(grid[i]), float(grid[i + 1])
            f0 = a
            while True:
                xm = 0.5 * (x0 + x1)
                fm = f(xm)
                if abs(fm) < 1e-10 or x1 - x0 < 1e-15:
                    roots.append(xm)
                    break
                if f0 * fm < 0:
                    x1 = xm
                else:
                    x0, f0 = xm, fm
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        raise NoEquilibriumError(
            f"no equilibrium of kp*(r-th)=mgl*sin(th) in [{lo:.4f}, {hi:.4f}]"
        )
    theta_star = min(roots, key=lambda th: abs(th - r))
    return EquilibriumPrediction(theta_star=theta_star, sigma_star=None, residual=f(theta_star))


def pid_equilibrium(
    params: PendulumParams, r: float, disturbance_d0: float = 0.0
) -> EquilibriumPrediction:
    """Integral action parks theta at r; sigma absorbs gravity and disturbance."""
    sigma_star = gravity_scale(params) * math.sin(r) - disturbance_d0
    return EquilibriumPrediction(theta_star=r, sigma_star=sigma_star, residual=0.0)


def estimate_g(period: float, ell: float) -> float:
    """Gravity from the small-amplitude period: g = 4*pi^2*ell / T^2."""
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    if not ell > 0:
        raise ValueError(f"rod length must be positive, got {ell}")
    return 4.0 * math.pi**2 * ell / period**2


def measure_period(times: Sequence[float], thetas: Sequence[float]) -> float:
    """Oscillation period from rising crossings of theta through its mean.

    Crossing instants are refined by linear interpolation between samples;
    the period is the mean spacing of successive rising crossings.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(thetas, dtype=float) - float(np.mean(thetas))
    if len(t) < 3:
        raise NotOscillatingError("trajectory too short")
    crossings: list[float] = []
    for i in range(len(x) - 1):
        if x[i] < 0.0 <= x[i + 1]:
            frac = -x[i] / (x[i + 1] - x[i])
            crossings.append(float(t[i] + frac * (t[i + 1] - t[i])))
    if len(crossings) < 3:
        raise NotOscillatingError(f"only {len(crossings)} rising crossings found")
    gaps = np.diff(crossings)
    return float(np.mean(gaps))


def perf_metrics(
    times: Sequence[float],
    thetas: Sequence[float],
    references: Sequence[float],
    theta0: float | None = None,
) -> PerfMetrics:
    """Step-response metrics against the (possibly time-varying) reference.

    Settling uses the standard 2% band of the step amplitude |r_final - theta0|,
    falling back to an absolute 0.02 rad band for zero-amplitude steps.
    """
    if len(times) == 0:
        raise ValueError("empty trajectory")
    t = np.asarray(times, dtype=float)
    th = np.asarray(thetas, dtype=float)
    r = np.asarray(references, dtype=float)
    err = r - th

    if theta0 is None:
        theta0 = float(th[0])
    r_final = float(r[-1])
    step = r_final - theta0

    # overshoot: excursion past the reference in the approach direction
    if step >= 0:
        overshoot = max(0.0, float(np.max(th - r)))
    else:
        overshoot = max(0.0, float(np.max(r - th)))

    band = 0.02 * abs(step) if abs(step) > 1e-12 else 0.02
    inside = np.abs(err) < band
    settling: float | None = None
    if inside[-1]:
        # first index after which the error never leaves the band
        outside = np.nonzero(~inside)[0]
        idx = 0 if len(outside) == 0 else int(outside[-1]) + 1
        settling = float(t[idx] - t[0])

    n = len(t)
    tail20 = err[max(0, n - max(1, n // 5)) :]
    tail10 = err[max(0, n - max(1, n // 10)) :]
    rms = float(np.sqrt(np.mean(tail20**2)))
    sse = float(abs(np.mean(tail10)))
    return PerfMetrics(
        overshoot=overshoot,
        settling_time_2pct=settling,
        rms_error=rms,
        steady_state_error=sse,
    )
