"""The simulation loop: wiring sources, noise, controller, and integrator.

One tick, in order: acquire the reference (or open-loop torque), low-pass
the reference, form noisy measurements, run the controller, saturate, add
input noise and disturbance, integrate one step, emit a telemetry frame.

Simulated time is decoupled from wall time: frame times are always exactly
t0 + n*dt, and the real-time pacer only schedules *when* ticks run. Given
the same config, seed, and input log a session is fully deterministic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

from . import controllers
from .analysis import PerfMetrics, augmented_energy_bang, augmented_energy_p, perf_metrics
from .config import ScenarioConfig, SessionMode, config_flat_items, config_hash
from .controllers import PD, BangBang, ControllerSpec, ControllerState, P, saturate
from .dynamics import SimState, nonlinear_rhs, total_energy
from .integrators import IntegrationDivergedError, stepper_for
from .signals import (
    LowPassState,
    NoiseStream,
    RangeMap,
    adc_to_range,
    disturbance_at,
    lowpass_step,
    reference_at,
)

TELEMETRY_MAX_HZ = 60.0
PACER_MAX_LAG = 0.5  # [s] sustained lag before the session aborts


class Outcome(str, Enum):
    COMPLETED = "completed"
    DIVERGED = "diverged"
    ABORTED = "aborted"


@dataclass(frozen=True)
class TelemetryFrame:
    t: float
    theta: float
    omega: float
    r: float
    tau_cmd: float
    tau_sat: float
    disturbance: float
    energy: float
    aug_energy: float | None
    theta_meas: float
    omega_meas: float


FRAME_FIELDS = (
    "t",
    "theta",
    "omega",
    "r",
    "tau_cmd",
    "tau_sat",
    "disturbance",
    "energy",
    "aug_energy",
    "theta_meas",
    "omega_meas",
)


@dataclass
class SessionRecord:
    config: ScenarioConfig
    frames: list[TelemetryFrame]
    outcome: Outcome
    metrics: PerfMetrics | None = None
    final_state: SimState | None = None
    final_controller_state: ControllerState | None = None
    adc_log: list[tuple[int, int]] = field(default_factory=list)  # (tick, raw) change events
    lag_diagnostic: str | None = None


def default_decimation(dt: float, max_hz: float = TELEMETRY_MAX_HZ) -> int:
    """Every k-th frame so the telemetry stream stays at or below max_hz."""
    return max(1, math.ceil(1.0 / (dt * max_hz)))


class Session:
    """Owns the state of one running simulation.

    Single-threaded by contract: all mutation (ticks and live input) must
    happen on the thread driving the loop. ADC frames applied between ticks
    are recorded as (tick, raw) change events so the run replays exactly.
    """

    def __init__(self, config: ScenarioConfig, adc_log: Sequence[tuple[int, int]] | None = None):
        self.config = config
        self.state = SimState(config.initial.theta, config.initial.omega, 0.0)
        self.cstate = controllers.initial_state()
        self.controller: ControllerSpec | None = config.controller
        self.params = config.params
        self.noise = NoiseStream(config.noise, extra_seed=config.seed)
        self.filter: LowPassState | None = None
        self.n = 0
        self.t0 = 0.0
        self.outcome: Outcome | None = None
        self.latest_adc: int | None = None
        self.adc_log: list[tuple[int, int]] = []
        self.reference = config.reference
        self.torque_map = RangeMap(config.limits.tau_min, config.limits.tau_max)
        self._stepper = stepper_for(config.integrator)
        self._replay = list(adc_log) if adc_log else None
        self._replay_pos = 0

    # -- live input (applied between ticks) ---------------------------------

    def apply_adc(self, raw: int) -> None:
        if raw != self.latest_adc:
            self.adc_log.append((self.n, raw))
        self.latest_adc = raw

    def set_controller(self, spec: ControllerSpec) -> None:
        # integral memory resets on a type change but survives gain tweaks
        if self.controller is None or type(spec) is not type(self.controller):
            self.cstate = controllers.initial_state()
        self.controller = spec

    def set_friction(self, b: float) -> None:
        self.params = replace(self.params, b=b)

    def set_reference(self, source) -> None:
        self.reference = source

    # -- the loop ------------------------------------------------------------

    def _drain_replay(self) -> None:
        if self._replay is None:
            return
        while self._replay_pos < len(self._replay) and self._replay[self._replay_pos][0] <= self.n:
            self.apply_adc(self._replay[self._replay_pos][1])
            self._replay_pos += 1

    def _evaluate(self, mutate: bool) -> tuple[TelemetryFrame, float]:
        """Compute the reference, torque, and frame for the current state.

        With mutate=False the controller and filter memories are left
        untouched (used for the terminal frame, which is never stepped).
        """
        cfg = self.config
        t = self.state.t
        open_loop = cfg.mode is SessionMode.OPEN_LOOP

        eps_tau, eps_theta, eps_omega = self.noise.sample()
        theta_m = self.state.theta + eps_theta
        omega_m = self.state.omega + eps_omega

        if open_loop:
            r = 0.0
            tau_cmd = (
                0.0 if self.latest_adc is None else adc_to_range(self.latest_adc, self.torque_map)
            )
            cstate_next = self.cstate
        else:
            r_raw = reference_at(self.reference, t, self.latest_adc)
            filt = self.filter if self.filter is not None else LowPassState(y=r_raw)
            filt = lowpass_step(filt, r_raw, cfg.dt)
            r = filt.y
            tau_cmd, cstate_next = controllers.compute_torque(
                self.controller, self.cstate.copy() if not mutate else self.cstate,
                r, theta_m, omega_m, cfg.dt,
            )
            if mutate:
                self.filter = filt
                self.cstate = cstate_next

        tau_sat = saturate(tau_cmd, cfg.limits)
        d = disturbance_at(cfg.disturbance, t)
        tau_total = tau_sat + eps_tau + d

        aug: float | None = None
        spec = self.controller
        if not open_loop:
            if isinstance(spec, BangBang):
                aug = augmented_energy_bang(self.params, self.state, r, spec.tau_max)
            elif isinstance(spec, (P, PD)):
                aug = augmented_energy_p(self.params, self.state, r, spec.kp)

        frame = TelemetryFrame(
            t=t,
            theta=self.state.theta,
            omega=self.state.omega,
            r=r,
            tau_cmd=tau_cmd,
            tau_sat=tau_sat,
            disturbance=d,
            energy=total_energy(self.params, self.state),
            aug_energy=aug,
            theta_meas=theta_m,
            omega_meas=omega_m,
        )
        return frame, tau_total

    def tick(self) -> TelemetryFrame:
        """Advance one step; returns the frame for the pre-step state."""
        if self.outcome is not None:
            raise RuntimeError(f"session already ended: {self.outcome.value}")
        self._drain_replay()
        frame, tau_total = self._evaluate(mutate=True)
        try:
            new = self._stepper(nonlinear_rhs, self.params, self.state, tau_total, self.config.dt)
        except IntegrationDivergedError:
            self.outcome = Outcome.DIVERGED
            return frame
        self.n += 1
        # keep simulated time exactly t0 + n*dt, free of accumulation error
        self.state = SimState(new.theta, new.omega, self.t0 + self.n * self.config.dt)
        return frame

    def terminal_frame(self) -> TelemetryFrame:
        """Frame for the final state; evaluated but never stepped."""
        self._drain_replay()
        frame, _ = self._evaluate(mutate=False)
        return frame


def run_headless(
    config: ScenarioConfig, adc_log: Sequence[tuple[int, int]] | None = None
) -> SessionRecord:
    """Run a scenario to completion as fast as possible."""
    if config.duration is None:
        raise ValueError("headless runs require a duration")
    session = Session(config, adc_log=adc_log)
    n_steps = round(config.duration / config.dt)
    frames: list[TelemetryFrame] = []
    for _ in range(n_steps):
        frames.append(session.tick())
        if session.outcome is not None:
            break
    outcome = session.outcome
    if outcome is None:
        frames.append(session.terminal_frame())
        outcome = Outcome.COMPLETED
    metrics = None
    if frames and config.mode is SessionMode.CLOSED_LOOP:
        metrics = perf_metrics(
            [f.t for f in frames],
            [f.theta for f in frames],
            [f.r for f in frames],
        )
    return SessionRecord(
        config=config,
        frames=frames,
        outcome=outcome,
        metrics=metrics,
        final_state=session.state,
        final_controller_state=session.cstate,
        adc_log=session.adc_log,
    )


# -- CSV persistence ----------------------------------------------------------


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".9e")


def to_csv(record: SessionRecord) -> str:
    """Serialize a session record; frames as rows, summary as '#' comments."""
    lines = [",".join(FRAME_FIELDS)]
    for f in record.frames:
        lines.append(",".join(_fmt(getattr(f, name)) for name in FRAME_FIELDS))
    lines.append(f"# outcome = {record.outcome.value}")
    lines.append(f"# config_hash = {config_hash(record.config)}")
    for key, value in config_flat_items(record.config):
        lines.append(f"# config.{key} = {value}")
    m = record.metrics
    if m is not None:
        lines.append(f"# metric.overshoot = {m.overshoot!r}")
        lines.append(f"# metric.settling_time_2pct = {m.settling_time_2pct!r}")
        lines.append(f"# metric.rms_error = {m.rms_error!r}")
        lines.append(f"# metric.steady_state_error = {m.steady_state_error!r}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[list[TelemetryFrame], dict[str, str]]:
    """Read back frames and the comment-block summary of a session CSV."""
    frames: list[TelemetryFrame] = []
    meta: dict[str, str] = {}
    lines = text.splitlines()
    if not lines or lines[0].split(",") != list(FRAME_FIELDS):
        raise ValueError("missing or unexpected CSV header")
    for line in lines[1:]:
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                meta[k.strip()] = v.strip()
            continue
        cells = line.split(",")
        if len(cells) != len(FRAME_FIELDS):
            raise ValueError(f"bad row: {line!r}")
        values = [None if c == "" else float(c) for c in cells]
        frames.append(TelemetryFrame(**dict(zip(FRAME_FIELDS, values))))
    return frames, meta


# -- real-time pacing ----------------------------------------------------------


class PacerLagError(RuntimeError):
    """The host fell behind wall time beyond the allowed sustained lag."""


class RealTimePacer:
    """Drift-free tick scheduler: deadline n is start + n*dt.

    If the host stalls, ticks run back-to-back (catch-up) until realigned;
    the simulation never skips ticks. Sustained lag beyond max_lag aborts.
    """

    def __init__(
        self,
        dt: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        max_lag: float = PACER_MAX_LAG,
    ):
        self.dt = dt
        self.clock = clock
        self.sleep = sleep
        self.max_lag = max_lag
        self.start: float | None = None
        self.lag = 0.0

    def wait_for_tick(self, n: int) -> float:
        """Block until tick n is due; returns the lag (0 when on time)."""
        if self.start is None:
            self.start = self.clock()
        deadline = self.start + n * self.dt
        now = self.clock()
        if now < deadline:
            self.sleep(deadline - now)
            self.lag = 0.0
            return 0.0
        self.lag = now - deadline
        if self.lag > self.max_lag:
            raise PacerLagError(f"sustained lag {self.lag:.3f}s exceeds {self.max_lag}s")
        return self.lag
