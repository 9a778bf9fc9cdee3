"""Joystick/ADC input path, reference conditioning, noise, and disturbances.

The joystick is emulated bit-exactly as a 10-bit ADC: integers 0..1023
mapped affinely onto a torque or reference range. References are low-pass
filtered and clamped to [-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ADC_MAX = 1023

# Passes human joystick motion (< 3 Hz) while flattening ADC quantization steps.
DEFAULT_FILTER_TAU = 0.05


@dataclass(frozen=True)
class RangeMap:
    """Affine map from ADC counts onto [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"range must be increasing, got [{self.lo}, {self.hi}]")


def adc_to_range(raw: int, rmap: RangeMap) -> float:
    """Map an ADC count 0..1023 onto [lo, hi]; exact at both endpoints."""
    if not 0 <= raw <= ADC_MAX:
        raise ValueError(f"ADC reading out of range 0..{ADC_MAX}: {raw}")
    return rmap.lo + (rmap.hi - rmap.lo) * raw / ADC_MAX


@dataclass
class LowPassState:
    """First-order low-pass filter memory."""

    y: float = 0.0
    tau_f: float = DEFAULT_FILTER_TAU

    def __post_init__(self):
        if not self.tau_f > 0:
            raise ValueError(f"filter time constant must be positive, got {self.tau_f}")


def lowpass_step(st: LowPassState, u: float, dt: float) -> LowPassState:
    """Exact discretization y' = u + (y - u)*exp(-dt/tau_f); stable for any dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return LowPassState(y=u + (st.y - u) * math.exp(-dt / st.tau_f), tau_f=st.tau_f)


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise levels; all zero means a noiseless run."""

    input_std: float = 0.0  # torque noise [N*m]
    meas_theta_std: float = 0.0  # [rad]
    meas_omega_std: float = 0.0  # [rad/s]
    seed: int = 0

    def __post_init__(self):
        if self.input_std < 0 or self.meas_theta_std < 0 or self.meas_omega_std < 0:
            raise ValueError("noise standard deviations must be non-negative")


class NoiseStream:
    """Seeded Gaussian noise source.

    Uses numpy's PCG64 generator; the algorithm is fixed per release so
    recorded sessions replay exactly. Three draws are consumed per tick
    regardless of which stds are zero, keeping streams aligned across
    configurations with the same seed.
    """

    def __init__(self, spec: NoiseSpec, extra_seed: int = 0):
        self.spec = spec
        entropy = [spec.seed & 0xFFFFFFFFFFFFFFFF, extra_seed & 0xFFFFFFFFFFFFFFFF]
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def sample(self) -> tuple[float, float, float]:
        """Draw (torque, theta, omega) noise for one tick."""
        z = self._rng.standard_normal(3)
        return (
            float(z[0]) * self.spec.input_std,
            float(z[1]) * self.spec.meas_theta_std,
            float(z[2]) * self.spec.meas_omega_std,
        )


@dataclass(frozen=True)
class NoDisturbance:
    pass


@dataclass(frozen=True)
class ConstantDisturbance:
    d0: float = 0.0  # [N*m]


@dataclass(frozen=True)
class SineDisturbance:
    amp: float = 0.1  # [N*m]
    freq: float = 0.5  # [Hz]
    phase: float = 0.0  # [rad]

    def __post_init__(self):
        if self.amp < 0:
            raise ValueError("disturbance amplitude must be non-negative")
        if not self.freq > 0:
            raise ValueError("disturbance frequency must be positive")


DisturbanceSpec = Union[NoDisturbance, ConstantDisturbance, SineDisturbance]


def disturbance_at(spec: DisturbanceSpec, t: float) -> float:
    if isinstance(spec, NoDisturbance):
        return 0.0
    if isinstance(spec, ConstantDisturbance):
        return spec.d0
    if isinstance(spec, SineDisturbance):
        return spec.amp * math.sin(2.0 * math.pi * spec.freq * t + spec.phase)
    raise TypeError(f"unknown disturbance spec: {spec!r}")


@dataclass(frozen=True)
class JoystickReference:
    """Live ADC stream mapped onto [-pi, pi]; dropouts hold the last value."""


@dataclass(frozen=True)
class SineReference:
    amp: float = 1.0  # [rad]
    freq: float = 0.2  # [Hz]
    offset: float = 0.0  # [rad]


@dataclass(frozen=True)
class ConstantReference:
    r: float = 0.0  # [rad]


ReferenceSource = Union[JoystickReference, SineReference, ConstantReference]

REFERENCE_MAP = RangeMap(-math.pi, math.pi)


def clamp_reference(r: float) -> float:
    return min(max(r, -math.pi), math.pi)


def reference_at(src: ReferenceSource, t: float, latest_adc: int | None = None) -> float:
    """Raw (pre-filter) reference at time t, clamped to [-pi, pi]."""
    if isinstance(src, ConstantReference):
        return clamp_reference(src.r)
    if isinstance(src, SineReference):
        return clamp_reference(src.offset + src.amp * math.sin(2.0 * math.pi * src.freq * t))
    if isinstance(src, JoystickReference):
        if latest_adc is None:
            return 0.0  # no frame received yet: centered stick
        return clamp_reference(adc_to_range(latest_adc, REFERENCE_MAP))
    raise TypeError(f"unknown reference source: {src!r}")
