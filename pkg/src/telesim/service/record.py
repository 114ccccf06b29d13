"""Session recording and deterministic replay.

A record is a JSON-lines file: one header object, then command and frame
events in order.  Frames are stored as the exact telemetry CSV rows, so
"replay reproduces the session" is checked byte for byte.  Replays refuse
records from a different package or protocol version: determinism is only
contracted within one build.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from .. import __version__
from ..config import Config, config_from_dict
from ..sim.engine import SimEngine
from ..sim.scenario import PilotConfig, ScenarioConfig, scenario_from_dict
from ..sim.world import SimulationDiverged
from .protocol import PROTO_VERSION
from .session import resolve_command


class RecordError(ValueError):
    pass


def scenario_as_dict(sc: ScenarioConfig) -> dict:
    out = {
        "kind": sc.kind,
        "duration": sc.duration,
        "dt": sc.dt,
        "spring_enabled": sc.spring_enabled,
        "haptics_enabled": sc.haptics_enabled,
        "arm_mode": sc.arm_mode,
        "contact_stiffness": sc.contact_stiffness,
        "contact_damping": sc.contact_damping,
        "accel_bound": sc.accel_bound,
        "pilot": vars(sc.pilot).copy(),
    }
    if sc.box is not None:
        out["box"] = vars(sc.box).copy()
    if sc.target is not None:
        out["target"] = vars(sc.target).copy()
    return out


class SessionRecorder:
    """Appends header, applied commands and telemetry rows to a JSONL file."""

    def __init__(self, path: str | Path, config: Config, scenario: ScenarioConfig,
                 kernel_name: str):
        self.path = Path(path)
        self._fh = self.path.open("w")
        header = {
            "type": "header",
            "proto": PROTO_VERSION,
            "version": __version__,
            "kernel": kernel_name,
            "config": config.as_dict(),
            "scenario": scenario_as_dict(scenario),
        }
        self._write(header)

    def _write(self, obj: dict) -> None:
        self._fh.write(json.dumps(obj, separators=(",", ":"), sort_keys=True) + "\n")

    def log_command(self, t_sim: float, raw: dict) -> None:
        self._write({"type": "command", "t_sim": t_sim, "command": raw})

    def log_frame(self, row: str) -> None:
        self._write({"type": "frame", "row": row})

    def close(self) -> None:
        self._fh.flush()
        self._fh.close()


def read_record(path: str | Path):
    """(header, commands, rows); parse errors name the byte offset."""
    header = None
    commands: list[dict] = []
    rows: list[str] = []
    offset = 0
    with Path(path).open("rb") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped:
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise RecordError(
                        f"corrupt record at byte {offset + exc.pos}: {exc.msg}"
                    ) from exc
                if not isinstance(obj, dict) or "type" not in obj:
                    raise RecordError(f"corrupt record at byte {offset}: not an event object")
                if obj["type"] == "header":
                    header = obj
                elif obj["type"] == "command":
                    commands.append(obj)
                elif obj["type"] == "frame":
                    rows.append(obj["row"])
                else:
                    raise RecordError(
                        f"corrupt record at byte {offset}: unknown event {obj['type']!r}"
                    )
            offset += len(line)
    if header is None:
        raise RecordError("record has no header")
    return header, commands, rows


def replay(path: str | Path, spring_override: bool | None = None):
    """Re-run a recorded session; returns (frames, recorded_rows).

    Commands are applied at their recorded sim times through the same
    resolution path as the live server, so with an unmodified record the
    produced telemetry rows equal the recorded ones byte for byte.
    """
    header, commands, rows = read_record(path)
    if header.get("proto") != PROTO_VERSION:
        raise RecordError(
            f"record speaks proto {header.get('proto')}, this build speaks {PROTO_VERSION}"
        )
    if header.get("version") != __version__:
        raise RecordError(
            f"record written by version {header.get('version')}, this build is {__version__}"
        )
    config = config_from_dict(header["config"])
    scenario = scenario_from_dict(header["scenario"])
    if spring_override is not None:
        scenario = replace(scenario, spring_enabled=spring_override)
    engine = SimEngine(
        config.human, config.robot, config.support_polygon, config.retarget,
        scenario, kernel=header.get("kernel"),
    )
    pilot_cfg = scenario.pilot
    world = engine.initial_world()
    frames = []
    f_hmi = 0.0
    current: dict | None = None
    pending = sorted(commands, key=lambda c: c["t_sim"])
    idx = 0
    steps = int(round(scenario.duration / scenario.dt)) if not rows else len(rows)
    for _ in range(steps):
        while idx < len(pending) and pending[idx]["t_sim"] <= world.t + 1e-12:
            current = pending[idx]["command"]
            idx += 1
        pin = resolve_command(
            current, config.human, config.support_polygon, pilot_cfg,
            world.human, f_hmi,
        )
        try:
            world, frame = engine.step(world, pin)
        except SimulationDiverged:
            break
        frames.append(frame)
        f_hmi = frame.f_hmi
    return frames, rows
