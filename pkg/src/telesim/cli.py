"""Command-line front door: headless runs, comparisons, serving, replay.

Exit codes: 0 success, 1 configuration/input error, 2 simulation diverged.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import Config, load_config
from .retarget import legacy_velocity_reference
from .sim import PilotScript, load_scenario, run_scenario, write_telemetry_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2


class CliError(Exception):
    pass


def _load_inputs(args) -> tuple[Config, "ScenarioConfig", PilotScript | None]:
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {args.config}") from exc
    except (ValueError, TypeError) as exc:
        raise CliError(f"bad config {args.config}: {exc}") from exc
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from exc
    except (ValueError, TypeError) as exc:
        raise CliError(f"bad scenario {args.scenario}: {exc}") from exc
    if getattr(args, "duration", None):
        scenario = replace(scenario, duration=args.duration)
    script = None
    if getattr(args, "script", None):
        try:
            script = PilotScript.load(args.script)
        except FileNotFoundError as exc:
            raise CliError(str(exc)) from exc
        except ValueError as exc:
            raise CliError(f"bad pilot script {args.script}: {exc}") from exc
    return config, scenario, script


def _write_report(report: dict, path: Path) -> None:
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _gnuplot_script(csv_path: Path) -> str:
    return (
        "set datafile separator ','\n"
        f"csv = '{csv_path}'\n"
        "set key autotitle columnhead\n"
        "set xlabel 'time (s)'\n"
        "plot csv using 1:4 with lines title 'human dcm', \\\n"
        "     csv using 1:11 with lines title 'robot dcm'\n"
        "pause -1\n"
    )


def cmd_run(args) -> int:
    config, scenario, script = _load_inputs(args)
    result = run_scenario(
        config.human, config.robot, config.support_polygon, config.retarget,
        scenario, script=script,
    )
    out = Path(args.out)
    write_telemetry_csv(result.frames, out)
    report_path = out.with_suffix(".report.json")
    _write_report(result.report, report_path)
    if args.gnuplot:
        out.with_suffix(".gp").write_text(_gnuplot_script(out))
    print(f"telemetry: {out}")
    print(f"report:    {report_path}")
    if result.diverged:
        print(f"simulation diverged: {result.diverged}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def compare_spring(config: Config, scenario, script, enabled=(True, False)) -> dict:
    sides = {}
    for tag, on in zip(("a", "b"), enabled):
        res = run_scenario(
            config.human, config.robot, config.support_polygon, config.retarget,
            replace(scenario, spring_enabled=on), script=script,
        )
        sides[tag] = {
            "spring_enabled": on,
            "moved": res.report.get("moved"),
            "max_lean": res.report.get("max_lean_h"),
            "max_f_r": res.report.get("max_f_r"),
            "position_drift": res.report.get("robot_displacement"),
            "mean_velocity": res.report.get("mean_velocity"),
            "steady_f_hmi": res.report.get("steady_f_hmi"),
            "diverged": res.diverged,
        }
    return {"mode": "spring", "a": sides["a"], "b": sides["b"]}


def compare_mapping(config: Config, scenario, script) -> dict:
    """Same lean signal through both mappings.

    The superseded mapping integrates the commanded lean into an unbounded
    position reference; the DCM mapping moves the actual robot, which
    stalls harmlessly against the load instead of winding up.
    """
    res = run_scenario(
        config.human, config.robot, config.support_polygon, config.retarget,
        scenario, script=script,
    )
    if script is None:
        script = PilotScript.load(scenario.script) if scenario.script else PilotScript.zero()
    n = scenario.steps
    t = np.arange(n + 1) * scenario.dt
    lean = np.array([script.value("theta_h", ti, 0.0) for ti in t])
    _, x_des = legacy_velocity_reference(lean, scenario.dt, config.human.g)
    return {
        "mode": "mapping",
        "legacy": {
            "x_des_final": float(x_des[-1]),
            "x_des_closed_form": float(0.5 * config.human.g * lean[-1] * t[-1] ** 2),
        },
        "dcm": {
            "robot_displacement": res.report.get("robot_displacement"),
            "box_moved": res.report.get("moved"),
            "max_abs_f_ext": res.report.get("max_abs_f_ext"),
            "diverged": res.diverged,
        },
    }


def cmd_compare(args) -> int:
    config, scenario, script = _load_inputs(args)
    if args.mode == "spring":
        table = compare_spring(config, scenario, script)
        rows = [
            ("spring", table["a"]["spring_enabled"], table["b"]["spring_enabled"]),
            ("box moved", table["a"]["moved"], table["b"]["moved"]),
            ("max lean (rad)", table["a"]["max_lean"], table["b"]["max_lean"]),
            ("max F_R (N)", table["a"]["max_f_r"], table["b"]["max_f_r"]),
            ("drift (m)", table["a"]["position_drift"], table["b"]["position_drift"]),
        ]
        diverged = table["a"]["diverged"] or table["b"]["diverged"]
    else:
        table = compare_mapping(config, scenario, script)
        rows = [
            ("legacy x_des (m)", table["legacy"]["x_des_final"], ""),
            ("dcm displacement (m)", table["dcm"]["robot_displacement"], ""),
            ("box moved", table["dcm"]["box_moved"], ""),
        ]
        diverged = table["dcm"]["diverged"]
    for name, a, b in rows:
        def fmt(v):
            return f"{v:.4g}" if isinstance(v, float) else str(v)
        print(f"{name:24s} {fmt(a):>12s} {fmt(b):>12s}")
    _write_report(table, Path(args.out))
    print(f"report: {args.out}")
    return EXIT_DIVERGED if diverged else EXIT_OK


def cmd_serve(args) -> int:
    from .service import TeleopServer

    config, scenario, _ = _load_inputs(args)
    host, _, port = args.bind.rpartition(":")
    try:
        port = int(port)
    except ValueError as exc:
        raise CliError(f"bad bind address {args.bind!r}") from exc
    server = TeleopServer(
        config, scenario, host=host or "127.0.0.1", port=port,
        record_path=args.record, static_dir=args.static,
    )

    async def _main():
        await server.start()
        print(f"listening on ws://{server.host}:{server.port} "
              f"(scenario {scenario.kind}, proto 1)")
        try:
            await asyncio.Future()
        except asyncio.CancelledError:
            pass
        finally:
            await server.stop()

    try:
        asyncio.run(_main())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_replay(args) -> int:
    from .service import RecordError, replay

    try:
        frames, recorded_rows = replay(args.record)
    except FileNotFoundError:
        raise CliError(f"record file not found: {args.record}")
    except RecordError as exc:
        raise CliError(str(exc))
    out = Path(args.out)
    write_telemetry_csv(frames, out)
    print(f"replayed {len(frames)} frames -> {out}")
    if args.check:
        rows = [f.row() for f in frames]
        if rows != recorded_rows:
            n = sum(1 for a, b in zip(rows, recorded_rows) if a != b)
            print(f"MISMATCH: {n} differing rows of {len(recorded_rows)}",
                  file=sys.stderr)
            return EXIT_DIVERGED
        print("byte-identical with the recorded telemetry")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="telesim",
        description="Bilateral teleoperation simulator for a wheeled humanoid",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run a scenario headless")
    run.add_argument("--scenario", required=True,
                     help="shipped name (free_balance, box_push_8p5, hand_off, "
                          "blocked_push) or scenario JSON path")
    run.add_argument("--config", default=None, help="profile/gains JSON")
    run.add_argument("--script", default=None, help="pilot script CSV override")
    run.add_argument("--out", default="telemetry.csv", help="telemetry CSV path")
    run.add_argument("--duration", type=float, default=None)
    run.add_argument("--gnuplot", action="store_true",
                     help="also emit a gnuplot script next to the CSV")
    run.set_defaults(fn=cmd_run)

    comp = sub.add_parser("compare", help="toggled side-by-side runs")
    comp.add_argument("--mode", choices=("spring", "mapping"), required=True)
    comp.add_argument("--scenario", default=None)
    comp.add_argument("--config", default=None)
    comp.add_argument("--script", default=None)
    comp.add_argument("--out", default="compare.json")
    comp.set_defaults(fn=cmd_compare)

    srv = sub.add_parser("serve", help="real-time teleoperation server")
    srv.add_argument("--scenario", default="free_balance")
    srv.add_argument("--config", default=None)
    srv.add_argument("--bind", default="127.0.0.1:8765")
    srv.add_argument("--record", default=None, help="session record JSONL path")
    srv.add_argument("--static", default=None, help="console asset directory")
    srv.set_defaults(fn=cmd_serve)

    rep = sub.add_parser("replay", help="re-run a recorded session")
    rep.add_argument("record")
    rep.add_argument("--out", default="replay.csv")
    rep.add_argument("--check", action="store_true",
                     help="verify byte-identity against the recorded telemetry")
    rep.set_defaults(fn=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "compare" and args.scenario is None:
        args.scenario = "box_push_8p5" if args.mode == "spring" else "blocked_push"
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
