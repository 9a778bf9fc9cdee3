"""Real-time command/telemetry server over TCP.

One full-duplex socket per client, newline-delimited JSON frames (see
protocol). All simulation state is owned by a single session thread;
commands arrive through an ordered queue drained once per tick, and
telemetry fans out through bounded per-client buffers, so a slow client
drops frames but can never block the loop or other clients.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
from collections import deque

from .config import Pacing, ScenarioConfig, SessionMode
from .protocol import (
    Ack,
    AdcFrame,
    CommandMessage,
    Drops,
    ErrorEvent,
    Ping,
    Pong,
    ProtocolError,
    ServerEvent,
    SessionStateEvent,
    SetController,
    SetFriction,
    SetReference,
    StartSession,
    StopSession,
    Telemetry,
    decode_command,
    encode_event,
)
from .session import (
    Outcome,
    PacerLagError,
    RealTimePacer,
    Session,
    SessionRecord,
    default_decimation,
    perf_metrics,
)
from .signals import ConstantReference, JoystickReference

log = logging.getLogger(__name__)

DEFAULT_PORT = 8700
SUBSCRIBER_BUFFER = 512


class Subscriber:
    """Bounded fan-out buffer; overflow drops the oldest event."""

    def __init__(self, capacity: int = SUBSCRIBER_BUFFER):
        self._buf: deque[ServerEvent] = deque(maxlen=capacity)
        self._cond = threading.Condition()
        self.drops = 0
        self.closed = False

    def publish(self, event: ServerEvent) -> None:
        with self._cond:
            if len(self._buf) == self._buf.maxlen:
                self._buf.popleft()
                self.drops += 1
            self._buf.append(event)
            self._cond.notify()

    def get(self, timeout: float | None = None) -> ServerEvent | None:
        with self._cond:
            if not self._buf:
                self._cond.wait(timeout)
            if not self._buf:
                return None
            return self._buf.popleft()

    def close(self) -> None:
        with self._cond:
            self.closed = True
            self._cond.notify_all()


class SessionHost:
    """Owns the session lifecycle and the single simulation thread."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[Subscriber] = []
        self._cmd_queue: queue.Queue = queue.Queue()
        self._thread: threading.Thread | None = None
        self._stop_flag = threading.Event()
        self.state = "stopped"
        self.session: Session | None = None
        self.last_record: SessionRecord | None = None

    # -- subscriptions ---------------------------------------------------------

    def subscribe(self) -> Subscriber:
        sub = Subscriber()
        with self._lock:
            self._subscribers.append(sub)
            sub.publish(SessionStateEvent(self.state))
        return sub

    def unsubscribe(self, sub: Subscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
        sub.close()

    def _publish(self, event: ServerEvent) -> None:
        with self._lock:
            subs = list(self._subscribers)
        for sub in subs:
            sub.publish(event)

    def _set_state(self, state: str) -> None:
        self.state = state
        self._publish(SessionStateEvent(state))

    # -- command handling (any thread) -----------------------------------------

    def handle_command(self, cmd: CommandMessage) -> ServerEvent:
        """Validate and route one command; always returns exactly one reply."""
        if isinstance(cmd, Ping):
            return Pong(cmd.nonce)
        if isinstance(cmd, StartSession):
            with self._lock:
                if self.state == "running":
                    return ErrorEvent("already-running", "a session is already running")
            self._start(cmd.config)
            return Ack("start_session")
        if isinstance(cmd, StopSession):
            if self.state != "running":
                return ErrorEvent("not-running", "no session to stop")
            self._stop_flag.set()
            return Ack("stop_session")

        if self.state != "running" or self.session is None:
            return ErrorEvent("not-running", "no active session")
        cfg = self.session.config
        if isinstance(cmd, AdcFrame):
            joystick_ok = cfg.mode is SessionMode.OPEN_LOOP or isinstance(
                self.session.reference, JoystickReference
            )
            if not joystick_ok:
                return ErrorEvent("wrong-mode", "session does not take joystick input")
            self._cmd_queue.put(cmd)
            return Ack("adc_frame")
        if isinstance(cmd, SetReference):
            if cfg.mode is not SessionMode.CLOSED_LOOP:
                return ErrorEvent("wrong-mode", "open-loop session takes no reference")
            self._cmd_queue.put(cmd)
            return Ack("set_reference")
        if isinstance(cmd, SetController):
            if cfg.mode is not SessionMode.CLOSED_LOOP:
                return ErrorEvent("wrong-mode", "open-loop session has no controller")
            self._cmd_queue.put(cmd)
            return Ack("set_controller")
        if isinstance(cmd, SetFriction):
            self._cmd_queue.put(cmd)
            return Ack("set_friction")
        return ErrorEvent("bad-request", f"unhandled command {cmd!r}")

    # -- session loop -----------------------------------------------------------

    def _start(self, config: ScenarioConfig) -> None:
        with self._lock:
            self._stop_flag.clear()
            self._cmd_queue = queue.Queue()
            self.session = Session(config)
            self._thread = threading.Thread(
                target=self._run_loop, args=(self.session,), daemon=True
            )
        self._set_state("running")
        self._thread.start()

    def _drain_commands(self, session: Session) -> None:
        while True:
            try:
                cmd = self._cmd_queue.get_nowait()
            except queue.Empty:
                return
            if isinstance(cmd, AdcFrame):
                session.apply_adc(cmd.raw)
            elif isinstance(cmd, SetReference):
                session.set_reference(ConstantReference(cmd.r))
            elif isinstance(cmd, SetController):
                session.set_controller(cmd.controller)
            elif isinstance(cmd, SetFriction):
                session.set_friction(cmd.b)

    def _run_loop(self, session: Session) -> None:
        cfg = session.config
        decim = default_decimation(cfg.dt)
        pacer = RealTimePacer(cfg.dt) if cfg.pacing is Pacing.REALTIME else None
        frames = []
        n_steps = None if cfg.duration is None else round(cfg.duration / cfg.dt)
        outcome = Outcome.COMPLETED
        lag_diagnostic = None
        try:
            n = 0
            while n_steps is None or n < n_steps:
                if self._stop_flag.is_set():
                    outcome = Outcome.ABORTED
                    break
                self._drain_commands(session)
                if pacer is not None:
                    pacer.wait_for_tick(n)
                frame = session.tick()
                frames.append(frame)
                if n % decim == 0:
                    self._publish(Telemetry(frame))
                if session.outcome is not None:
                    outcome = session.outcome
                    break
                n += 1
            else:
                frames.append(session.terminal_frame())
        except PacerLagError as exc:
            outcome = Outcome.ABORTED
            lag_diagnostic = str(exc)
            log.warning("session aborted: %s", exc)

        metrics = None
        if frames and cfg.mode is SessionMode.CLOSED_LOOP:
            metrics = perf_metrics(
                [f.t for f in frames], [f.theta for f in frames], [f.r for f in frames]
            )
        self.last_record = SessionRecord(
            config=cfg,
            frames=frames,
            outcome=outcome,
            metrics=metrics,
            final_state=session.state,
            final_controller_state=session.cstate,
            adc_log=session.adc_log,
            lag_diagnostic=lag_diagnostic,
        )
        self._set_state(outcome.value if outcome is not Outcome.COMPLETED else "stopped")

    def wait_stopped(self, timeout: float | None = None) -> None:
        thread = self._thread
        if thread is not None:
            thread.join(timeout)


class ControlServer:
    """TCP acceptor plus per-client reader/writer threads."""

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.host = SessionHost()
        self._addr = (host, port)
        self._sock: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._running = threading.Event()

    @property
    def port(self) -> int:
        assert self._sock is not None
        return self._sock.getsockname()[1]

    def start(self) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind(self._addr)
        sock.listen()
        self._sock = sock
        self._running.set()
        t = threading.Thread(target=self._accept_loop, daemon=True)
        t.start()
        self._threads.append(t)

    def stop(self) -> None:
        self._running.clear()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        self.host._stop_flag.set()

    def serve_forever(self) -> None:
        if self._sock is None:
            self.start()
        try:
            while self._running.is_set():
                self._threads = [t for t in self._threads if t.is_alive()]
                threading.Event().wait(0.5)
        except KeyboardInterrupt:
            self.stop()

    def _accept_loop(self) -> None:
        assert self._sock is not None
        while self._running.is_set():
            try:
                conn, addr = self._sock.accept()
            except OSError:
                return
            log.info("client connected: %s", addr)
            t = threading.Thread(target=self._client_loop, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _client_loop(self, conn: socket.socket) -> None:
        sub = self.host.subscribe()
        writer = threading.Thread(target=self._writer_loop, args=(conn, sub), daemon=True)
        writer.start()
        try:
            buf = b""
            while self._running.is_set():
                data = conn.recv(65536)
                if not data:
                    break
                buf += data
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if not line.strip():
                        continue
                    try:
                        cmd = decode_command(line.decode("utf-8"))
                    except ProtocolError as exc:
                        sub.publish(ErrorEvent(exc.code, str(exc)))
                        continue
                    except UnicodeDecodeError:
                        sub.publish(ErrorEvent("bad-request", "frame is not valid UTF-8"))
                        continue
                    sub.publish(self.host.handle_command(cmd))
        except OSError:
            pass
        finally:
            self.host.unsubscribe(sub)
            try:
                conn.close()
            except OSError:
                pass

    def _writer_loop(self, conn: socket.socket, sub: Subscriber) -> None:
        last_drops = 0
        try:
            while not sub.closed:
                event = sub.get(timeout=0.25)
                if event is None:
                    continue
                if sub.drops > last_drops:
                    conn.sendall((encode_event(Drops(sub.drops - last_drops)) + "\n").encode())
                    last_drops = sub.drops
                conn.sendall((encode_event(event) + "\n").encode())
        except OSError:
            pass
