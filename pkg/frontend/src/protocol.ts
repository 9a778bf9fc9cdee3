/**
 * Wire protocol: newline-delimited JSON frames, version field "v" = 1.
 *
 * Mirrors the server's schema. Every outbound command is validated before
 * send; inbound events are validated on arrival and malformed frames raise
 * ProtocolError instead of leaking partial objects into the UI.
 */

export const PROTOCOL_VERSION = 1;
export const ADC_MAX = 1023;

export class ProtocolError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.code = code;
  }
}

export interface TelemetryFrame {
  t: number;
  theta: number | null;
  omega: number | null;
  r: number | null;
  tau_cmd: number | null;
  tau_sat: number | null;
  disturbance: number | null;
  energy: number | null;
  aug_energy: number | null;
  theta_meas: number | null;
  omega_meas: number | null;
}

export const FRAME_FIELDS = [
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
] as const;

export type ControllerSpec =
  | { type: "bang_bang"; tau_max: number; dead_band: number }
  | { type: "p"; kp: number }
  | { type: "pd"; kp: number; kd: number }
  | { type: "pid"; kp: number; ki: number; kd: number; sigma_limit: number | null }
  | { type: "fpid"; kp: number; ki: number; kd: number; lam: number; mu: number; memory: number };

/** Scenario config as the server accepts it; all fields optional (server defaults apply). */
export interface ScenarioConfigDict {
  mode?: "open_loop" | "closed_loop";
  params?: { m?: number; ell?: number; g?: number; b?: number };
  controller?: ControllerSpec | null;
  reference?: Record<string, unknown>;
  noise?: Record<string, unknown>;
  disturbance?: Record<string, unknown>;
  integrator?: "euler" | "rk4";
  dt?: number;
  duration?: number | null;
  initial?: { theta?: number; omega?: number };
  limits?: { tau_min?: number; tau_max?: number };
  pacing?: "realtime" | "fast";
  seed?: number;
}

export type CommandMessage =
  | { type: "start_session"; config: ScenarioConfigDict }
  | { type: "stop_session" }
  | { type: "adc_frame"; raw: number }
  | { type: "set_reference"; r: number }
  | { type: "set_controller"; controller: ControllerSpec }
  | { type: "set_friction"; b: number }
  | { type: "ping"; nonce: number };

export type SessionState = "running" | "stopped" | "diverged" | "aborted";

export type ServerEvent =
  | { type: "telemetry"; frame: TelemetryFrame }
  | { type: "session_state"; state: SessionState }
  | { type: "error"; code: string; message: string }
  | { type: "pong"; nonce: number }
  | { type: "ack"; cmd: string }
  | { type: "drops"; count: number };

/** JSON with recursively sorted keys and no whitespace (the canonical form). */
function canonicalStringify(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalStringify).join(",") + "]";
  }
  const obj = value as Record<string, unknown>;
  const parts = Object.keys(obj)
    .sort()
    .map((k) => JSON.stringify(k) + ":" + canonicalStringify(obj[k]));
  return "{" + parts.join(",") + "}";
}

function isInt(x: unknown): x is number {
  return typeof x === "number" && Number.isInteger(x);
}

function isNum(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function fail(field: string, expected: string): never {
  throw new ProtocolError("bad-request", `${field}: expected ${expected}`);
}

const CONTROLLER_GAIN_FIELDS: Record<string, string[]> = {
  bang_bang: ["tau_max", "dead_band"],
  p: ["kp"],
  pd: ["kp", "kd"],
  pid: ["kp", "ki", "kd"],
  fpid: ["kp", "ki", "kd"],
};

/** Same rejections the server applies, so bad specs never reach the wire. */
export function validateController(spec: unknown, path: string): ControllerSpec {
  if (typeof spec !== "object" || spec === null) fail(path, "an object");
  const obj = spec as Record<string, unknown>;
  const kind = obj.type;
  if (typeof kind !== "string" || !(kind in CONTROLLER_GAIN_FIELDS)) {
    fail(`${path}.type`, "a known controller type");
  }
  for (const field of CONTROLLER_GAIN_FIELDS[kind]) {
    const value = obj[field];
    if (value !== undefined && (!isNum(value) || value < 0)) {
      fail(`${path}.${field}`, "a non-negative number");
    }
  }
  if (kind === "pid" && obj.sigma_limit !== undefined && obj.sigma_limit !== null) {
    if (!isNum(obj.sigma_limit) || obj.sigma_limit <= 0) {
      fail(`${path}.sigma_limit`, "null or a positive number");
    }
  }
  if (kind === "fpid") {
    for (const field of ["lam", "mu"]) {
      const value = obj[field];
      if (value !== undefined && (!isNum(value) || value <= 0 || value >= 1)) {
        fail(`${path}.${field}`, "an order in (0, 1)");
      }
    }
    if (obj.memory !== undefined && (!isInt(obj.memory) || obj.memory <= 0)) {
      fail(`${path}.memory`, "a positive integer");
    }
  }
  return spec as ControllerSpec;
}

const CONFIG_KEYS = new Set([
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
]);

const MAX_DT = 0.1;

export function validateConfig(config: unknown, path: string): ScenarioConfigDict {
  if (typeof config !== "object" || config === null || Array.isArray(config)) {
    fail(path, "an object");
  }
  const obj = config as Record<string, unknown>;
  for (const key of Object.keys(obj)) {
    if (!CONFIG_KEYS.has(key)) fail(`${path}.${key}`, "a known scenario key");
  }
  if (obj.dt !== undefined && (!isNum(obj.dt) || obj.dt <= 0 || obj.dt > MAX_DT)) {
    fail(`${path}.dt`, `a step in (0, ${MAX_DT}]`);
  }
  if (obj.duration !== undefined && obj.duration !== null && (!isNum(obj.duration) || obj.duration <= 0)) {
    fail(`${path}.duration`, "null or a positive number");
  }
  if (obj.controller !== undefined && obj.controller !== null) {
    validateController(obj.controller, `${path}.controller`);
  }
  if (obj.mode !== undefined && obj.mode !== "open_loop" && obj.mode !== "closed_loop") {
    fail(`${path}.mode`, "open_loop or closed_loop");
  }
  if (obj.pacing !== undefined && obj.pacing !== "realtime" && obj.pacing !== "fast") {
    fail(`${path}.pacing`, "realtime or fast");
  }
  if (obj.integrator !== undefined && obj.integrator !== "euler" && obj.integrator !== "rk4") {
    fail(`${path}.integrator`, "euler or rk4");
  }
  if (obj.seed !== undefined && !isInt(obj.seed)) {
    fail(`${path}.seed`, "an integer");
  }
  return config as ScenarioConfigDict;
}

export function encodeCommand(cmd: CommandMessage): string {
  // validate before encoding so a buggy UI path cannot reach the wire
  switch (cmd.type) {
    case "start_session":
      validateConfig(cmd.config, "start_session.config");
      break;
    case "stop_session":
      break;
    case "adc_frame":
      if (!isInt(cmd.raw) || cmd.raw < 0 || cmd.raw > ADC_MAX) {
        fail("adc_frame.raw", `an integer 0..${ADC_MAX}`);
      }
      break;
    case "set_reference":
      if (!isNum(cmd.r)) fail("set_reference.r", "a finite number");
      break;
    case "set_controller":
      validateController(cmd.controller, "set_controller.controller");
      break;
    case "set_friction":
      if (!isNum(cmd.b) || cmd.b < 0) fail("set_friction.b", "a non-negative number");
      break;
    case "ping":
      if (!isInt(cmd.nonce)) fail("ping.nonce", "an integer");
      break;
    default:
      throw new ProtocolError("bad-request", `unknown command ${JSON.stringify(cmd)}`);
  }
  return canonicalStringify({ ...cmd, v: PROTOCOL_VERSION });
}

function parseEnvelope(line: string): Record<string, unknown> {
  let payload: unknown;
  try {
    payload = JSON.parse(line);
  } catch (exc) {
    throw new ProtocolError("bad-request", `invalid JSON: ${exc}`);
  }
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new ProtocolError("bad-request", "frame must be a JSON object");
  }
  const obj = payload as Record<string, unknown>;
  if (obj.v !== PROTOCOL_VERSION) {
    throw new ProtocolError("bad-request", `v: unsupported protocol version ${obj.v}`);
  }
  return obj;
}

function numOrNull(payload: Record<string, unknown>, field: string): number | null {
  const value = payload[field];
  if (value === null) return null;
  if (!isNum(value)) fail(`telemetry.frame.${field}`, "a number or null");
  return value;
}

export function decodeEvent(line: string): ServerEvent {
  const p = parseEnvelope(line);
  switch (p.type) {
    case "telemetry": {
      const raw = p.frame;
      if (typeof raw !== "object" || raw === null) fail("telemetry.frame", "an object");
      const fr = raw as Record<string, unknown>;
      const keys = Object.keys(fr).sort();
      if (keys.join(",") !== [...FRAME_FIELDS].sort().join(",")) {
        fail("telemetry.frame", "exactly the telemetry fields");
      }
      if (!isNum(fr.t)) fail("telemetry.frame.t", "a number");
      const frame = { t: fr.t } as TelemetryFrame;
      for (const field of FRAME_FIELDS) {
        if (field === "t") continue;
        (frame as unknown as Record<string, number | null>)[field] = numOrNull(fr, field);
      }
      return { type: "telemetry", frame };
    }
    case "session_state": {
      const state = p.state;
      if (
        state !== "running" &&
        state !== "stopped" &&
        state !== "diverged" &&
        state !== "aborted"
      ) {
        fail("session_state.state", "a known state");
      }
      return { type: "session_state", state };
    }
    case "error": {
      if (typeof p.code !== "string") fail("error.code", "a string");
      if (typeof p.message !== "string") fail("error.message", "a string");
      return { type: "error", code: p.code, message: p.message };
    }
    case "pong": {
      if (!isInt(p.nonce)) fail("pong.nonce", "an integer");
      return { type: "pong", nonce: p.nonce };
    }
    case "ack": {
      if (typeof p.cmd !== "string") fail("ack.cmd", "a string");
      return { type: "ack", cmd: p.cmd };
    }
    case "drops": {
      if (!isInt(p.count)) fail("drops.count", "an integer");
      return { type: "drops", count: p.count };
    }
    default:
      throw new ProtocolError("bad-request", `type: unknown event type ${JSON.stringify(p.type)}`);
  }
}

/** Decode a command line (used against the shared golden corpus in tests). */
export function decodeCommand(line: string): CommandMessage {
  const p = parseEnvelope(line);
  switch (p.type) {
    case "start_session":
      return { type: "start_session", config: validateConfig(p.config, "start_session.config") };
    case "stop_session":
      return { type: "stop_session" };
    case "adc_frame":
      if (!isInt(p.raw) || p.raw < 0 || p.raw > ADC_MAX) {
        fail("adc_frame.raw", `an integer 0..${ADC_MAX}`);
      }
      return { type: "adc_frame", raw: p.raw };
    case "set_reference":
      if (!isNum(p.r)) fail("set_reference.r", "a finite number");
      return { type: "set_reference", r: p.r };
    case "set_controller":
      return {
        type: "set_controller",
        controller: validateController(p.controller, "set_controller.controller"),
      };
    case "set_friction":
      if (!isNum(p.b) || p.b < 0) fail("set_friction.b", "a non-negative number");
      return { type: "set_friction", b: p.b };
    case "ping":
      if (!isInt(p.nonce)) fail("ping.nonce", "an integer");
      return { type: "ping", nonce: p.nonce };
    default:
      throw new ProtocolError("bad-request", `type: unknown command type ${JSON.stringify(p.type)}`);
  }
}
