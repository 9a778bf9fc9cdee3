/**
 * Browser entry: wires the joystick, control panel, animation canvas, and
 * scope to a CockpitClient. Serve this directory statically and point the
 * server URL field at a websocket bridge in front of the control server.
 */

import { CockpitClient, WebSocketLineSocket } from "./client.js";
import {
  CockpitState,
  Mode,
  SCOPE_WINDOW_S,
  ScopePane,
  drawPendulum,
  pendulumScene,
  scopePanes,
} from "./cockpit.js";
import { JoystickSender } from "./joystick.js";
import { ControllerSpec, ScenarioConfigDict } from "./protocol.js";

const FRICTION_CHOICES = [0.0, 0.1, 0.5, 1.0];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toasts");
  const item = document.createElement("div");
  item.className = "toast";
  item.textContent = message;
  item.onclick = () => item.remove();
  box.appendChild(item);
  setTimeout(() => item.remove(), 6000);
}

function sessionConfig(mode: Mode, controller: ControllerSpec): ScenarioConfigDict {
  if (mode === "open_loop") {
    return { mode, controller: null, duration: null, pacing: "realtime", dt: 0.02 };
  }
  return {
    mode,
    controller,
    reference: { type: "joystick" },
    duration: null,
    pacing: "realtime",
    dt: 0.02,
  };
}

function controllerFromPanel(): ControllerSpec {
  const kind = el<HTMLSelectElement>("controller").value;
  const gain = (id: string) => parseFloat(el<HTMLInputElement>(id).value);
  switch (kind) {
    case "bang_bang":
      return { type: "bang_bang", tau_max: 5.0, dead_band: 0.0 };
    case "p":
      return { type: "p", kp: gain("kp") };
    case "pd":
      return { type: "pd", kp: gain("kp"), kd: gain("kd") };
    case "fpid":
      return {
        type: "fpid",
        kp: gain("kp"),
        ki: gain("ki"),
        kd: gain("kd"),
        lam: 0.9,
        mu: 0.9,
        memory: 2000,
      };
    default:
      return { type: "pid", kp: gain("kp"), ki: gain("ki"), kd: gain("kd"), sigma_limit: null };
  }
}

function drawScope(canvas: HTMLCanvasElement, panes: ScopePane[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const paneH = canvas.height / panes.length;
  ctx.clearRect(0, 0, w, canvas.height);
  panes.forEach((pane, i) => {
    const top = i * paneH;
    ctx.strokeStyle = "#ccc";
    ctx.strokeRect(0, top, w, paneH);
    ctx.fillStyle = "#666";
    ctx.font = "12px sans-serif";
    ctx.fillText(pane.label, 6, top + 14);
    const samples = pane.samples.filter((s) => s.v !== null);
    if (samples.length < 2) return;
    const tEnd = samples[samples.length - 1].t;
    const tStart = tEnd - SCOPE_WINDOW_S;
    const values = samples.map((s) => s.v as number);
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    ctx.strokeStyle = "#36c";
    ctx.beginPath();
    samples.forEach((s, j) => {
      const x = ((s.t - tStart) / SCOPE_WINDOW_S) * w;
      const y = top + paneH - (((s.v as number) - lo) / span) * (paneH - 20) - 4;
      if (j === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

function start(): void {
  const state = new CockpitState();
  const url = el<HTMLInputElement>("server-url").value;
  const client = new CockpitClient(new WebSocketLineSocket(url));
  const joystick = new JoystickSender((cmd) => client.send(cmd));

  client.onEvent((ev) => {
    switch (ev.type) {
      case "telemetry":
        state.scopeUpdate(ev.frame, performance.now());
        break;
      case "session_state":
        state.sessionState = ev.state;
        el<HTMLSpanElement>("status").textContent = ev.state;
        break;
      case "error":
        toast(`${ev.code}: ${ev.message}`);
        break;
      case "drops":
        toast(`telemetry dropped ${ev.count} frames (slow client)`);
        break;
      default:
        break;
    }
  });

  el<HTMLButtonElement>("start").onclick = () => {
    const mode = el<HTMLSelectElement>("mode").value as Mode;
    if (state.sessionState === "running") {
      if (!confirm("Restart the session in the selected mode?")) return;
      client.send({ type: "stop_session" });
    }
    state.mode = mode;
    state.clearScope();
    client.send({ type: "start_session", config: sessionConfig(mode, controllerFromPanel()) });
  };
  el<HTMLButtonElement>("stop").onclick = () => client.send({ type: "stop_session" });
  el<HTMLSelectElement>("friction").onchange = () => {
    client.send({ type: "set_friction", b: FRICTION_CHOICES[el<HTMLSelectElement>("friction").selectedIndex] });
  };
  for (const id of ["controller", "kp", "ki", "kd"]) {
    el<HTMLElement>(id).oninput = () => {
      if (state.mode === "closed_loop") client.setControllerDebounced(controllerFromPanel());
    };
  }
  el<HTMLButtonElement>("pause").onclick = () => {
    state.paused = !state.paused;
  };

  const stick = el<HTMLInputElement>("joystick");
  stick.oninput = () => {
    state.setJoystick(parseFloat(stick.value));
    joystick.move(state.joystick);
  };
  stick.onpointerdown = () => joystick.engage(state.joystick);
  stick.onpointerup = () => joystick.disengage();

  const pendulumCanvas = el<HTMLCanvasElement>("pendulum");
  const scopeCanvas = el<HTMLCanvasElement>("scope");
  const render = () => {
    drawPendulum(
      pendulumCanvas.getContext("2d")!,
      pendulumScene(state, performance.now()),
      pendulumCanvas.width,
      pendulumCanvas.height
    );
    if (!state.paused) drawScope(scopeCanvas, scopePanes(state));
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);
}

el<HTMLButtonElement>("connect").onclick = start;
