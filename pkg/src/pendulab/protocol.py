"""Wire protocol: newline-delimited JSON frames with a "type" discriminator.

Every frame carries a version field "v" (current: 1); unknown versions and
malformed frames are rejected with an error that names the offending field.
Encoding is canonical (sorted keys, no spaces) so encode(decode(line))
reproduces the corpus byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Union

from .config import ConfigError, ScenarioConfig, config_from_dict, config_to_dict
from .controllers import ControllerSpec
from .config import _CONTROLLER_TYPES, _union_from_dict, _union_to_dict
from .session import FRAME_FIELDS, TelemetryFrame
from .signals import ADC_MAX

PROTOCOL_VERSION = 1


class ProtocolError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


# -- commands (client -> server) -----------------------------------------------


@dataclass(frozen=True)
class StartSession:
    config: ScenarioConfig


@dataclass(frozen=True)
class StopSession:
    pass


@dataclass(frozen=True)
class AdcFrame:
    raw: int


@dataclass(frozen=True)
class SetReference:
    r: float


@dataclass(frozen=True)
class SetController:
    controller: ControllerSpec


@dataclass(frozen=True)
class SetFriction:
    b: float


@dataclass(frozen=True)
class Ping:
    nonce: int


CommandMessage = Union[
    StartSession, StopSession, AdcFrame, SetReference, SetController, SetFriction, Ping
]


# -- events (server -> client) ---------------------------------------------------


@dataclass(frozen=True)
class Telemetry:
    frame: TelemetryFrame


@dataclass(frozen=True)
class SessionStateEvent:
    state: str  # running | stopped | diverged | aborted


@dataclass(frozen=True)
class ErrorEvent:
    code: str
    message: str


@dataclass(frozen=True)
class Pong:
    nonce: int


@dataclass(frozen=True)
class Ack:
    cmd: str


@dataclass(frozen=True)
class Drops:
    count: int


ServerEvent = Union[Telemetry, SessionStateEvent, ErrorEvent, Pong, Ack, Drops]


def _dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def encode_command(cmd: CommandMessage) -> str:
    base: dict[str, Any] = {"v": PROTOCOL_VERSION}
    if isinstance(cmd, StartSession):
        base.update(type="start_session", config=config_to_dict(cmd.config))
    elif isinstance(cmd, StopSession):
        base.update(type="stop_session")
    elif isinstance(cmd, AdcFrame):
        base.update(type="adc_frame", raw=cmd.raw)
    elif isinstance(cmd, SetReference):
        base.update(type="set_reference", r=cmd.r)
    elif isinstance(cmd, SetController):
        base.update(type="set_controller", controller=_union_to_dict(cmd.controller, _CONTROLLER_TYPES))
    elif isinstance(cmd, SetFriction):
        base.update(type="set_friction", b=cmd.b)
    elif isinstance(cmd, Ping):
        base.update(type="ping", nonce=cmd.nonce)
    else:
        raise TypeError(f"unknown command: {cmd!r}")
    return _dumps(base)


def encode_event(ev: ServerEvent) -> str:
    base: dict[str, Any] = {"v": PROTOCOL_VERSION}
    if isinstance(ev, Telemetry):
        frame = {k: _json_float(getattr(ev.frame, k)) for k in FRAME_FIELDS}
        base.update(type="telemetry", frame=frame)
    elif isinstance(ev, SessionStateEvent):
        base.update(type="session_state", state=ev.state)
    elif isinstance(ev, ErrorEvent):
        base.update(type="error", code=ev.code, message=ev.message)
    elif isinstance(ev, Pong):
        base.update(type="pong", nonce=ev.nonce)
    elif isinstance(ev, Ack):
        base.update(type="ack", cmd=ev.cmd)
    elif isinstance(ev, Drops):
        base.update(type="drops", count=ev.count)
    else:
        raise TypeError(f"unknown event: {ev!r}")
    return _dumps(base)


def _json_float(x: float | None) -> float | None:
    if x is None:
        return None
    if not math.isfinite(x):
        # divergence frames can carry inf/nan; JSON has no literal for them
        return None
    return x


def _parse_envelope(line: str) -> dict:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("bad-request", f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ProtocolError("bad-request", "frame must be a JSON object")
    v = payload.get("v")
    if v != PROTOCOL_VERSION:
        raise ProtocolError("bad-request", f"v: unsupported protocol version {v!r}")
    return payload


def _require(payload: dict, field: str, kind: type, type_name: str) -> Any:
    if field not in payload:
        raise ProtocolError("bad-request", f"{type_name}.{field}: missing")
    value = payload[field]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ProtocolError("bad-request", f"{type_name}.{field}: expected {kind.__name__}")
    return value


def decode_command(line: str) -> CommandMessage:
    payload = _parse_envelope(line)
    msg_type = payload.get("type")
    try:
        if msg_type == "start_session":
            cfg = payload.get("config")
            try:
                return StartSession(config_from_dict(cfg))
            except ConfigError as exc:
                raise ProtocolError("bad-request", f"config: {exc}") from exc
        if msg_type == "stop_session":
            return StopSession()
        if msg_type == "adc_frame":
            raw = _require(payload, "raw", int, "adc_frame")
            if not 0 <= raw <= ADC_MAX:
                raise ProtocolError("bad-request", f"adc_frame.raw: out of range 0..{ADC_MAX}")
            return AdcFrame(raw)
        if msg_type == "set_reference":
            return SetReference(_require(payload, "r", float, "set_reference"))
        if msg_type == "set_controller":
            try:
                spec = _union_from_dict(
                    payload.get("controller"), _CONTROLLER_TYPES, "controller"
                )
            except ConfigError as exc:
                raise ProtocolError("bad-request", str(exc)) from exc
            return SetController(spec)
        if msg_type == "set_friction":
            b = _require(payload, "b", float, "set_friction")
            if b < 0:
                raise ProtocolError("bad-request", "set_friction.b: must be non-negative")
            return SetFriction(b)
        if msg_type == "ping":
            return Ping(_require(payload, "nonce", int, "ping"))
    except ProtocolError:
        raise
    raise ProtocolError("bad-request", f"type: unknown command type {msg_type!r}")


def decode_event(line: str) -> ServerEvent:
    payload = _parse_envelope(line)
    msg_type = payload.get("type")
    if msg_type == "telemetry":
        frame = payload.get("frame")
        if not isinstance(frame, dict) or set(frame) != set(FRAME_FIELDS):
            raise ProtocolError("bad-request", "telemetry.frame: missing or wrong fields")
        return Telemetry(TelemetryFrame(**{k: frame[k] for k in FRAME_FIELDS}))
    if msg_type == "session_state":
        state = _require(payload, "state", str, "session_state")
        if state not in ("running", "stopped", "diverged", "aborted"):
            raise ProtocolError("bad-request", f"session_state.state: unknown state {state!r}")
        return SessionStateEvent(state)
    if msg_type == "error":
        return ErrorEvent(
            _require(payload, "code", str, "error"),
            _require(payload, "message", str, "error"),
        )
    if msg_type == "pong":
        return Pong(_require(payload, "nonce", int, "pong"))
    if msg_type == "ack":
        return Ack(_require(payload, "cmd", str, "ack"))
    if msg_type == "drops":
        return Drops(_require(payload, "count", int, "drops"))
    raise ProtocolError("bad-request", f"type: unknown event type {msg_type!r}")
