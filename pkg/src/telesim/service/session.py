"""Shared command resolution: raw wire commands to pilot inputs.

Live serving and record replay must turn the same command into the same
actuation, so the logic lives here and depends only on the command and the
current world.  A commanded lean goes through the pilot balance law (the
browser cannot close a 500 Hz ankle loop); an explicit CoP overrides it.
"""

from __future__ import annotations

import math

import numpy as np

from ..arms import ArmJoints
from ..params import HumanCommand, HumanParams, SupportPolygon
from ..sim.pilot import PilotInput, balance_cop
from ..sim.scenario import PilotConfig


def resolve_command(
    raw: dict | None,
    human: HumanParams,
    polygon: SupportPolygon,
    pilot_cfg: PilotConfig,
    human_state,
    f_hmi: float,
) -> PilotInput:
    raw = raw or {}
    lean = raw.get("lean") or 0.0
    cop = raw.get("cop")
    if cop is None:
        cop, clamped = balance_cop(human, polygon, pilot_cfg, human_state, f_hmi, lean)
    else:
        clamped = not (polygon.p_min <= cop <= polygon.p_max)
        cop = polygon.clamp(cop)
    com_disp = raw.get("com_disp")
    if com_disp is None:
        com_disp = human.h_com * math.sin(human_state.theta)
    arms = raw.get("arms") or {}
    left = np.asarray(arms.get("l", [0.0, 0.0, 0.0, 0.0]), dtype=float)
    right = np.asarray(arms.get("r", [0.0, 0.0, 0.0, 0.0]), dtype=float)
    toggles = raw.get("toggles") or {}
    return PilotInput(
        command=HumanCommand(cop=cop, com_disp=com_disp),
        arm_left=ArmJoints(q=left, side="left"),
        arm_right=ArmJoints(q=right, side="right"),
        cop_clamped=clamped,
        spring_enabled=toggles.get("spring"),
        haptics_enabled=toggles.get("haptics"),
    )
