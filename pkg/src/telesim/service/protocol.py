"""Wire protocol: JSON text frames over a WebSocket, version 1.

Message shapes are documented bit-exactly in docs/protocol.md.  This
module validates inbound messages and builds outbound ones; it carries no
simulation logic.
"""

from __future__ import annotations

import json
import math
from typing import Any

PROTO_VERSION = 1

ROLE_PILOT = "pilot"
ROLE_OBSERVER = "observer"


class ProtocolError(ValueError):
    """Invalid inbound message; ``code`` goes into the error frame."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


def _finite_number(msg: dict, key: str, required: bool = False) -> float | None:
    if key not in msg or msg[key] is None:
        if required:
            raise ProtocolError("invalid_command", f"missing field {key!r}")
        return None
    v = msg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ProtocolError("invalid_command", f"field {key!r} must be a finite number")
    return float(v)


def parse_message(raw: str | bytes) -> dict:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProtocolError("malformed_json", str(exc)) from exc
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("malformed_message", "expected an object with a 'type' field")
    return msg


def validate_hello(msg: dict) -> dict:
    if msg.get("proto") != PROTO_VERSION:
        raise ProtocolError(
            "unsupported_proto", f"server speaks proto {PROTO_VERSION}"
        )
    role = msg.get("role", ROLE_PILOT)
    if role not in (ROLE_PILOT, ROLE_OBSERVER):
        raise ProtocolError("invalid_role", f"unknown role {role!r}")
    return {"role": role}


def validate_command(msg: dict) -> dict:
    """Normalize a command message; raises ProtocolError on bad fields."""
    seq = msg.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise ProtocolError("invalid_command", "seq must be a nonnegative integer")
    out: dict[str, Any] = {"seq": seq}
    out["t_client"] = _finite_number(msg, "t_client")
    out["lean"] = _finite_number(msg, "lean")
    out["cop"] = _finite_number(msg, "cop")
    out["com_disp"] = _finite_number(msg, "com_disp")
    arms = msg.get("arms")
    if arms is not None:
        if not isinstance(arms, dict):
            raise ProtocolError("invalid_command", "arms must be an object")
        parsed = {}
        for side in ("l", "r"):
            vals = arms.get(side)
            if vals is None:
                continue
            if not isinstance(vals, list) or len(vals) != 4:
                raise ProtocolError("invalid_command", f"arms.{side} must be a list of 4")
            joints = []
            for v in vals:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ProtocolError("invalid_command", f"arms.{side} must be finite numbers")
                joints.append(float(v))
            parsed[side] = joints
        out["arms"] = parsed
    toggles = msg.get("toggles")
    if toggles is not None:
        if not isinstance(toggles, dict):
            raise ProtocolError("invalid_command", "toggles must be an object")
        parsed_t = {}
        for key in ("spring", "haptics"):
            if key in toggles:
                if not isinstance(toggles[key], bool):
                    raise ProtocolError("invalid_command", f"toggles.{key} must be boolean")
                parsed_t[key] = toggles[key]
        out["toggles"] = parsed_t
    return out


def encode(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"), sort_keys=True)


def welcome_message(role: str, session_id: str, config: dict, scenario_kind: str) -> dict:
    return {
        "type": "welcome",
        "proto": PROTO_VERSION,
        "role": role,
        "session": session_id,
        "scenario": scenario_kind,
        "config": config,
    }


def state_message(seq: int, t_sim: float, frame_dict: dict, achieved_rate: float) -> dict:
    return {
        "type": "state",
        "proto": PROTO_VERSION,
        "seq": seq,
        "t_sim": t_sim,
        "frame": frame_dict,
        "achieved_rate": achieved_rate,
    }


def error_message(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def pong_message(nonce: Any, t_server: float) -> dict:
    return {"type": "pong", "nonce": nonce, "t_server": t_server}
