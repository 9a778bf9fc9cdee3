"""Scenario configuration: the full description of one experiment.

A scenario can come from three places, all sharing the same field names:
a nested dict (the wire protocol's start_session payload), a flat key=value
text file with dotted paths (``controller.kp = 2.0``), or CLI ``--set``
overrides. Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .controllers import FPID, PD, PID, BangBang, ControllerSpec, P, TorqueLimits
from .dynamics import PendulumParams, SimState
from .integrators import DEFAULT_DT, IntegratorKind, validate_dt
from .signals import (
    ConstantDisturbance,
    ConstantReference,
    DisturbanceSpec,
    JoystickReference,
    NoDisturbance,
    NoiseSpec,
    ReferenceSource,
    SineDisturbance,
    SineReference,
)


class ConfigError(ValueError):
    """Scenario validation failure; message carries the offending field path."""


class SessionMode(str, Enum):
    OPEN_LOOP = "open_loop"
    CLOSED_LOOP = "closed_loop"


class Pacing(str, Enum):
    REALTIME = "realtime"
    FAST = "fast"


@dataclass(frozen=True)
class ScenarioConfig:
    mode: SessionMode = SessionMode.CLOSED_LOOP
    params: PendulumParams = field(default_factory=PendulumParams)
    controller: ControllerSpec | None = field(default_factory=PID)
    reference: ReferenceSource = field(default_factory=ConstantReference)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    disturbance: DisturbanceSpec = field(default_factory=NoDisturbance)
    integrator: IntegratorKind = IntegratorKind.RK4
    dt: float = DEFAULT_DT
    duration: float | None = 10.0  # None: run until stopped
    initial: SimState = field(default_factory=SimState)
    limits: TorqueLimits = field(default_factory=TorqueLimits)
    pacing: Pacing = Pacing.FAST
    seed: int = 0

    def __post_init__(self):
        validate_dt(self.dt)
        if self.duration is not None and not self.duration > 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.mode is SessionMode.CLOSED_LOOP and self.controller is None:
            raise ConfigError("closed_loop mode requires a controller")


_CONTROLLER_TYPES: dict[str, type] = {
    "bang_bang": BangBang,
    "p": P,
    "pd": PD,
    "pid": PID,
    "fpid": FPID,
}
_REFERENCE_TYPES: dict[str, type] = {
    "joystick": JoystickReference,
    "sine": SineReference,
    "constant": ConstantReference,
}
_DISTURBANCE_TYPES: dict[str, type] = {
    "none": NoDisturbance,
    "constant": ConstantDisturbance,
    "sine": SineDisturbance,
}


def _tag_for(obj: Any, table: dict[str, type]) -> str:
    for name, cls in table.items():
        if type(obj) is cls:
            return name
    raise ConfigError(f"unregistered tagged type: {type(obj).__name__}")


def _union_to_dict(obj: Any, table: dict[str, type]) -> dict:
    d = {"type": _tag_for(obj, table)}
    d.update(vars(obj))
    return d


def _union_from_dict(d: Any, table: dict[str, type], path: str) -> Any:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object, got {d!r}")
    d = dict(d)
    tag = d.pop("type", None)
    if tag not in table:
        raise ConfigError(f"{path}.type: expected one of {sorted(table)}, got {tag!r}")
    try:
        return table[tag](**d)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Nested plain-dict form (JSON-compatible) of the scenario."""
    return {
        "mode": cfg.mode.value,
        "params": vars(cfg.params),
        "controller": (
            None if cfg.controller is None else _union_to_dict(cfg.controller, _CONTROLLER_TYPES)
        ),
        "reference": _union_to_dict(cfg.reference, _REFERENCE_TYPES),
        "noise": vars(cfg.noise),
        "disturbance": _union_to_dict(cfg.disturbance, _DISTURBANCE_TYPES),
        "integrator": cfg.integrator.value,
        "dt": cfg.dt,
        "duration": cfg.duration,
        "initial": {"theta": cfg.initial.theta, "omega": cfg.initial.omega},
        "limits": vars(cfg.limits),
        "pacing": cfg.pacing.value,
        "seed": cfg.seed,
    }


def _build(cls, d: Any, path: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object, got {d!r}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_from_dict(d: dict) -> ScenarioConfig:
    """Validate and build a ScenarioConfig; unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ConfigError(f"scenario must be an object, got {d!r}")
    known = {
        "mode",
        "params",
        "controller",
        "reference",
        "noise",
        "disturbance",
        "integrator",
        "dt",
        "duration",
        "initial",
        "limits",
        "pacing",
        "seed",
    }
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")

    kwargs: dict[str, Any] = {}
    if "mode" in d:
        try:
            kwargs["mode"] = SessionMode(d["mode"])
        except ValueError as exc:
            raise ConfigError(f"mode: {exc}") from exc
    if "params" in d:
        kwargs["params"] = _build(PendulumParams, d["params"], "params")
    if "controller" in d:
        kwargs["controller"] = (
            None
            if d["controller"] is None
            else _union_from_dict(d["controller"], _CONTROLLER_TYPES, "controller")
        )
    if "reference" in d:
        kwargs["reference"] = _union_from_dict(d["reference"], _REFERENCE_TYPES, "reference")
    if "noise" in d:
        kwargs["noise"] = _build(NoiseSpec, d["noise"], "noise")
    if "disturbance" in d:
        kwargs["disturbance"] = _union_from_dict(
            d["disturbance"], _DISTURBANCE_TYPES, "disturbance"
        )
    if "integrator" in d:
        try:
            kwargs["integrator"] = IntegratorKind(d["integrator"])
        except ValueError as exc:
            raise ConfigError(f"integrator: {exc}") from exc
    if "dt" in d:
        kwargs["dt"] = float(d["dt"])
    if "duration" in d:
        kwargs["duration"] = None if d["duration"] is None else float(d["duration"])
    if "initial" in d:
        kwargs["initial"] = _build(SimState, d["initial"], "initial")
    if "limits" in d:
        kwargs["limits"] = _build(TorqueLimits, d["limits"], "limits")
    if "pacing" in d:
        try:
            kwargs["pacing"] = Pacing(d["pacing"])
        except ValueError as exc:
            raise ConfigError(f"pacing: {exc}") from exc
    if "seed" in d:
        kwargs["seed"] = int(d["seed"])
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_scalar(text: str) -> Any:
    s = text.strip()
    low = s.lower()
    if low in ("none", "null"):
        return None
    if low == "true":
        return True
    if low == "false":
        return False
    if low == "pi":
        return math.pi
    if low == "-pi":
        return -math.pi
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def nest_flat_keys(flat: dict[str, Any]) -> dict:
    """Turn dotted paths into the nested dict form."""
    out: dict = {}
    for key, value in flat.items():
        parts = key.split(".")
        node = out
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{key}: conflicts with scalar key {p!r}")
        node[parts[-1]] = value
    return out


def parse_scenario_text(text: str) -> ScenarioConfig:
    """Parse the flat key=value scenario file format.

    Lines are ``dotted.path = value``; blank lines and '#' comments are
    ignored. Values: numbers, true/false, none, pi/-pi, or bare strings.
    """
    flat: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        flat[key.strip()] = _parse_scalar(value)
    return config_from_dict(nest_flat_keys(flat))


def apply_overrides(cfg: ScenarioConfig, overrides: dict[str, str]) -> ScenarioConfig:
    """Apply dotted-path string overrides (CLI --set) on top of a config."""
    d = config_to_dict(cfg)
    for key, value in overrides.items():
        parts = key.split(".")
        node: Any = d
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise ConfigError(f"unknown override path: {key}")
            node = node[p]
        if not isinstance(node, dict):
            raise ConfigError(f"unknown override path: {key}")
        node[parts[-1]] = _parse_scalar(value)
    return config_from_dict(d)


def config_flat_items(cfg: ScenarioConfig) -> list[tuple[str, Any]]:
    """Flatten the config to sorted (dotted-path, value) pairs."""
    items: list[tuple[str, Any]] = []

    def walk(prefix: str, node: Any):
        if isinstance(node, dict):
            for k in sorted(node):
                walk(f"{prefix}.{k}" if prefix else k, node[k])
        else:
            items.append((prefix, node))

    walk("", config_to_dict(cfg))
    return items


def config_hash(cfg: ScenarioConfig) -> str:
    """Stable short hash of the fully resolved config."""
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
