/**
 * Client over any newline-delimited line transport.
 *
 * The cockpit never touches simulation state directly: every mutation goes
 * out as a validated CommandMessage, and everything it shows comes back as
 * a decoded ServerEvent.
 */

import {
  CommandMessage,
  ControllerSpec,
  ProtocolError,
  ServerEvent,
  decodeEvent,
  encodeCommand,
} from "./protocol.js";

export interface LineSocket {
  sendLine(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export const GAIN_DEBOUNCE_MS = 100; // SetController at <= 10 Hz while sliding

export class CockpitClient {
  private readonly socket: LineSocket;
  private readonly handlers: Array<(ev: ServerEvent) => void> = [];
  private pendingController: ControllerSpec | null = null;
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private readonly now: () => number;
  private lastControllerSentAt = -Infinity;

  constructor(socket: LineSocket, now: () => number = () => Date.now()) {
    this.socket = socket;
    this.now = now;
    socket.onLine((line) => this.handleLine(line));
  }

  onEvent(handler: (ev: ServerEvent) => void): void {
    this.handlers.push(handler);
  }

  send(cmd: CommandMessage): void {
    this.socket.sendLine(encodeCommand(cmd));
  }

  /** Gain-slider path: coalesces rapid updates to at most one per 100 ms. */
  setControllerDebounced(spec: ControllerSpec): void {
    const elapsed = this.now() - this.lastControllerSentAt;
    if (elapsed >= GAIN_DEBOUNCE_MS) {
      this.sendController(spec);
      return;
    }
    this.pendingController = spec;
    if (this.debounceHandle === null) {
      this.debounceHandle = setTimeout(() => {
        this.debounceHandle = null;
        if (this.pendingController !== null) {
          const pending = this.pendingController;
          this.pendingController = null;
          this.sendController(pending);
        }
      }, GAIN_DEBOUNCE_MS - elapsed);
    }
  }

  private sendController(spec: ControllerSpec): void {
    this.lastControllerSentAt = this.now();
    this.send({ type: "set_controller", controller: spec });
  }

  close(): void {
    if (this.debounceHandle !== null) {
      clearTimeout(this.debounceHandle);
      this.debounceHandle = null;
    }
    this.socket.close();
  }

  private handleLine(line: string): void {
    let event: ServerEvent;
    try {
      event = decodeEvent(line);
    } catch (exc) {
      if (exc instanceof ProtocolError) {
        event = { type: "error", code: exc.code, message: `inbound: ${exc.message}` };
      } else {
        throw exc;
      }
    }
    for (const handler of this.handlers) {
      handler(event);
    }
  }
}

/**
 * Browser transport. Raw TCP is unreachable from a page, so the cockpit
 * speaks the same newline protocol over a WebSocket; point it at a
 * websocket-to-TCP bridge in front of the server (e.g. websockify).
 */
export class WebSocketLineSocket implements LineSocket {
  private readonly ws: WebSocket;
  private lineHandler: ((line: string) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private buffer = "";

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (msg) => {
      this.buffer += String(msg.data);
      let idx: number;
      while ((idx = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, idx);
        this.buffer = this.buffer.slice(idx + 1);
        if (line.trim() && this.lineHandler) this.lineHandler(line);
      }
    };
    this.ws.onclose = () => {
      if (this.closeHandler) this.closeHandler();
    };
  }

  sendLine(line: string): void {
    this.ws.send(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}
