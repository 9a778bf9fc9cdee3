/**
 * Joystick model: a 1-axis stick mapped to the 10-bit ADC range.
 *
 * While engaged the sender emits an adc_frame at a fixed 50 Hz regardless
 * of how often the pointer moves; disengaging stops the stream and the
 * server holds the last value.
 */

import { ADC_MAX, CommandMessage } from "./protocol.js";

export const SEND_HZ = 50;
export const SEND_INTERVAL_MS = 1000 / SEND_HZ;

export function clampPosition(position: number): number {
  if (Number.isNaN(position)) return 0;
  return Math.min(1, Math.max(-1, position));
}

/** Map stick position [-1, 1] to 0..1023 (half-up rounding: 0 -> 512). */
export function joystickToAdc(position: number): number {
  const p = clampPosition(position);
  return Math.round(((p + 1) / 2) * ADC_MAX);
}

export interface Scheduler {
  setInterval(fn: () => void, ms: number): unknown;
  clearInterval(handle: unknown): void;
}

const defaultScheduler: Scheduler = {
  setInterval: (fn, ms) => setInterval(fn, ms),
  clearInterval: (handle) => clearInterval(handle as Parameters<typeof clearInterval>[0]),
};

export class JoystickSender {
  private position = 0;
  private handle: unknown = null;
  private readonly send: (cmd: CommandMessage) => void;
  private readonly scheduler: Scheduler;

  constructor(send: (cmd: CommandMessage) => void, scheduler: Scheduler = defaultScheduler) {
    this.send = send;
    this.scheduler = scheduler;
  }

  get engaged(): boolean {
    return this.handle !== null;
  }

  move(position: number): void {
    this.position = clampPosition(position);
  }

  engage(position = 0): void {
    this.move(position);
    if (this.handle !== null) return;
    this.emit(); // first frame goes out immediately, then on the 50 Hz grid
    this.handle = this.scheduler.setInterval(() => this.emit(), SEND_INTERVAL_MS);
  }

  disengage(): void {
    if (this.handle === null) return;
    this.scheduler.clearInterval(this.handle);
    this.handle = null;
  }

  private emit(): void {
    this.send({ type: "adc_frame", raw: joystickToAdc(this.position) });
  }
}
