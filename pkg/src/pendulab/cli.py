"""Command-line entry points: run scenarios headless, sweep parameters, serve.

Exit codes: 0 success, 1 diverged/aborted, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from datetime import datetime
from pathlib import Path

from .analysis import p_equilibrium, pid_equilibrium
from .config import ConfigError, ScenarioConfig, apply_overrides, parse_scenario_text
from .controllers import PID, P
from .session import Outcome, SessionRecord, run_headless, to_csv
from .signals import ConstantDisturbance, ConstantReference

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DEFAULT_PORT_ENV = "PENDULAB_PORT"


def _load_scenario(path: str, overrides: list[str]) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    cfg = parse_scenario_text(p.read_text())
    if overrides:
        pairs = {}
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            k, _, v = item.partition("=")
            pairs[k.strip()] = v
        cfg = apply_overrides(cfg, pairs)
    return cfg


def _out_dir(arg: str | None) -> Path:
    if arg:
        out = Path(arg)
    else:
        out = Path("sessions") / datetime.now().strftime("%Y%m%d-%H%M%S")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _summary_lines(record: SessionRecord) -> list[str]:
    cfg = record.config
    lines = [f"outcome: {record.outcome.value}", f"frames: {len(record.frames)}"]
    m = record.metrics
    if m is not None:
        lines += [
            f"overshoot: {m.overshoot:.6g} rad",
            "settling_time_2pct: "
            + (f"{m.settling_time_2pct:.6g} s" if m.settling_time_2pct is not None else "not settled"),
            f"rms_error: {m.rms_error:.6g} rad",
            f"steady_state_error: {m.steady_state_error:.6g} rad",
        ]
    # equilibrium prediction vs what the run actually reached
    if record.frames and isinstance(cfg.reference, ConstantReference):
        final_theta = record.frames[-1].theta
        r = cfg.reference.r
        if isinstance(cfg.controller, P) and cfg.controller.kp > 0:
            pred = p_equilibrium(cfg.params, cfg.controller.kp, r)
            lines.append(f"predicted theta*: {pred.theta_star:.6g} rad (observed {final_theta:.6g})")
        elif isinstance(cfg.controller, PID):
            d0 = cfg.disturbance.d0 if isinstance(cfg.disturbance, ConstantDisturbance) else 0.0
            pred = pid_equilibrium(cfg.params, r, d0)
            sigma = record.final_controller_state.sigma if record.final_controller_state else math.nan
            lines.append(f"predicted theta*: {pred.theta_star:.6g} rad (observed {final_theta:.6g})")
            lines.append(f"predicted sigma*: {pred.sigma_star:.6g} N*m (observed {sigma:.6g})")
    return lines


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _load_scenario(args.scenario, args.set or [])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = run_headless(cfg)
    out = _out_dir(args.out)
    csv_path = out / "session.csv"
    csv_path.write_text(to_csv(record))
    summary = _summary_lines(record)
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    print(f"wrote {csv_path}")
    for line in summary:
        print(line)
    return EXIT_OK if record.outcome is Outcome.COMPLETED else EXIT_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        cfg = _load_scenario(args.scenario, args.set or [])
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
        if not values:
            raise ConfigError("--values must list at least one number")
        # probe that the parameter names a numeric field
        apply_overrides(cfg, {args.param: str(values[0])})
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(args.out)
    rows = []
    any_failed = False
    for value in values:
        run_cfg = apply_overrides(cfg, {args.param: repr(value)})
        record = run_headless(run_cfg)
        name = f"{args.param.replace('.', '_')}_{value:g}.csv"
        (out / name).write_text(to_csv(record))
        m = record.metrics
        if record.outcome is not Outcome.COMPLETED or m is None:
            any_failed = True
            rows.append((value, record.outcome.value, "-", "-", "-", "-"))
        else:
            settle = f"{m.settling_time_2pct:.4g}" if m.settling_time_2pct is not None else "n/a"
            rows.append(
                (value, record.outcome.value, f"{m.overshoot:.4g}", settle,
                 f"{m.rms_error:.4g}", f"{m.steady_state_error:.4g}")
            )
    header = (args.param, "outcome", "overshoot", "settle_2pct", "rms_err", "ss_err")
    table = [" | ".join(str(c) for c in header)]
    table += [" | ".join(str(c) for c in row) for row in rows]
    (out / "sweep.txt").write_text("\n".join(table) + "\n")
    print("\n".join(table))
    return EXIT_FAILED if any_failed else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import DEFAULT_PORT, ControlServer

    port = args.port
    if port is None:
        port = int(os.environ.get(DEFAULT_PORT_ENV, DEFAULT_PORT))
    server = ControlServer(port=port)
    try:
        server.start()
    except OSError as exc:
        print(f"error: cannot bind port {port}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(f"listening on 127.0.0.1:{server.port}")
    if args.scenario:
        try:
            cfg = _load_scenario(args.scenario, args.set or [])
            if args.dt is not None:
                cfg = apply_overrides(cfg, {"dt": str(args.dt)})
            from .protocol import StartSession

            server.host.handle_command(StartSession(cfg))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            server.stop()
            return EXIT_USAGE
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pendulab", description="Pendulum control laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless, write CSV + summary")
    p_run.add_argument("scenario", help="scenario file (flat key=value format)")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    p_run.add_argument("--out", help="output directory (default ./sessions/<timestamp>/)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario once per parameter value")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--param", required=True, help="dotted config path, e.g. params.b")
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sweep.add_argument("--out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="start the command/telemetry server")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--dt", type=float, default=None)
    p_serve.add_argument("--scenario", help="start this scenario immediately")
    p_serve.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
