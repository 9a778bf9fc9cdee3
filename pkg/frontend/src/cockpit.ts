/**
 * Cockpit state and the pure parts of rendering.
 *
 * The scene geometry (rod angle, ghost marker, torque arrow) is computed in
 * plain data first so it can be tested without a canvas; drawPendulum then
 * paints that model onto a 2D context.
 */

import { RingBuffer } from "./ring.js";
import { SessionState, TelemetryFrame } from "./protocol.js";

export const SCOPE_WINDOW_S = 10;
export const SCOPE_CAPACITY = 600; // 10 s at the 60 Hz telemetry ceiling
export const STALE_AFTER_MS = 500;
export const TAU_MAX = 5.0;

export interface ScopeSample {
  t: number;
  v: number | null;
}

export type Mode = "open_loop" | "closed_loop";

export class CockpitState {
  connected = false;
  sessionState: SessionState = "stopped";
  mode: Mode = "closed_loop";
  latest: TelemetryFrame | null = null;
  latestAtMs: number | null = null;
  joystick = 0;
  paused = false; // freezes drawing, never buffering

  readonly theta = new RingBuffer<ScopeSample>(SCOPE_CAPACITY);
  readonly reference = new RingBuffer<ScopeSample>(SCOPE_CAPACITY);
  readonly tauSat = new RingBuffer<ScopeSample>(SCOPE_CAPACITY);
  readonly augEnergy = new RingBuffer<ScopeSample>(SCOPE_CAPACITY);

  setJoystick(position: number): void {
    this.joystick = Math.min(1, Math.max(-1, position));
  }

  scopeUpdate(frame: TelemetryFrame, nowMs: number): void {
    this.latest = frame;
    this.latestAtMs = nowMs;
    this.theta.push({ t: frame.t, v: frame.theta });
    this.reference.push({ t: frame.t, v: frame.r });
    this.tauSat.push({ t: frame.t, v: frame.tau_sat });
    this.augEnergy.push({ t: frame.t, v: frame.aug_energy });
  }

  isStale(nowMs: number): boolean {
    if (this.latestAtMs === null) return true;
    return nowMs - this.latestAtMs > STALE_AFTER_MS;
  }

  clearScope(): void {
    this.theta.clear();
    this.reference.clear();
    this.tauSat.clear();
    this.augEnergy.clear();
  }
}

/** Reduce an unwrapped angle to [0, 2*pi). */
export function wrapAngle(theta: number): number {
  const tau = 2 * Math.PI;
  const wrapped = theta % tau;
  return wrapped < 0 ? wrapped + tau : wrapped;
}

export interface PendulumScene {
  rodAngle: number; // [0, 2*pi), 0 = hanging down
  refAngle: number | null;
  torqueFraction: number; // tau_sat / tau_max, clamped to [-1, 1]
  stale: boolean;
}

export function pendulumScene(state: CockpitState, nowMs: number): PendulumScene {
  const frame = state.latest;
  return {
    rodAngle: frame && frame.theta !== null ? wrapAngle(frame.theta) : 0,
    refAngle: frame && frame.r !== null ? wrapAngle(frame.r) : null,
    torqueFraction:
      frame && frame.tau_sat !== null
        ? Math.min(1, Math.max(-1, frame.tau_sat / TAU_MAX))
        : 0,
    stale: state.isStale(nowMs),
  };
}

/** Angle to canvas coordinates: theta = 0 points down, positive is CCW. */
function bobPosition(cx: number, cy: number, radius: number, theta: number) {
  return { x: cx + radius * Math.sin(theta), y: cy + radius * Math.cos(theta) };
}

export function drawPendulum(
  ctx: CanvasRenderingContext2D,
  scene: PendulumScene,
  width: number,
  height: number
): void {
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.35;
  ctx.clearRect(0, 0, width, height);
  ctx.save();
  if (scene.stale) {
    ctx.globalAlpha = 0.35; // grey the scene while frames are stale
  }

  if (scene.refAngle !== null) {
    const ghost = bobPosition(cx, cy, radius, scene.refAngle);
    ctx.strokeStyle = "#7a7";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(ghost.x, ghost.y);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  const bob = bobPosition(cx, cy, radius, scene.rodAngle);
  ctx.strokeStyle = "#333";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(bob.x, bob.y);
  ctx.stroke();

  ctx.fillStyle = "#c33";
  ctx.beginPath();
  ctx.arc(bob.x, bob.y, 10, 0, 2 * Math.PI);
  ctx.fill();

  ctx.fillStyle = "#555";
  ctx.beginPath();
  ctx.arc(cx, cy, 5, 0, 2 * Math.PI);
  ctx.fill();

  if (scene.torqueFraction !== 0) {
    // torque arrow: arc around the pivot, length scaled to tau_sat/tau_max
    const span = scene.torqueFraction * Math.PI * 0.8;
    ctx.strokeStyle = "#36c";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, radius * 0.3, Math.PI / 2, Math.PI / 2 - span, span > 0);
    ctx.stroke();
  }

  ctx.restore();
  if (scene.stale) {
    ctx.fillStyle = "#c33";
    ctx.font = "16px sans-serif";
    ctx.fillText("telemetry lag", 10, 24);
  }
}

export interface ScopePane {
  label: string;
  samples: ScopeSample[];
}

/** Traces for the three scope panes over the visible window. */
export function scopePanes(state: CockpitState): ScopePane[] {
  return [
    { label: "theta / r", samples: state.theta.toArray() },
    { label: "tau_sat", samples: state.tauSat.toArray() },
    { label: "E_a", samples: state.augEnergy.toArray() },
  ];
}
