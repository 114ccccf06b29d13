"""Pilot models: the scripted pilot for headless runs and the shared
lean-to-CoP resolution used by live sessions.

A lean reference is turned into a center of pressure with a DCM-rate
balance law (the haptic force on the torso is compensated, exactly as
human balance reflexes do), and the reference is clamped to what the
support polygon can statically hold under that force, minus a margin.
That clamp is what makes the haptic spring matter: a restoring force on
the torso lowers the CoP a lean needs, extending how far the pilot can
go before running out of foot.

The scripted pilot adds two stand-ins for a live human's visual control:
an optional speed-holding lean trim, and an optional pursuit law closing
the hand-to-target gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..arms import ArmJoints
from ..params import AipState, CartPoleState, HumanCommand, HumanParams, SupportPolygon
from ..rom import human_dcm
from .scenario import PilotConfig, PilotScript


@dataclass(frozen=True)
class PilotInput:
    """Resolved pilot actuation for one step."""

    command: HumanCommand
    arm_left: ArmJoints
    arm_right: ArmJoints
    cop_clamped: bool = False
    spring_enabled: bool | None = None   # None: use the scenario toggle
    haptics_enabled: bool | None = None


def balance_cop(
    human: HumanParams,
    polygon: SupportPolygon,
    cfg: PilotConfig,
    state: AipState,
    f_hmi: float,
    ref: float,
) -> tuple[float, bool]:
    """CoP driving the pilot's DCM onto a lean reference.

    The reference is first clamped to the statically holdable range under
    the current torso force; the returned flag reports CoP saturation.
    """
    h = human.h_com
    gamma = human.gamma
    xi_max = min(polygon.p_max / h - f_hmi / gamma - cfg.margin, cfg.ref_limit)
    xi_min = max(polygon.p_min / h - f_hmi / gamma + cfg.margin, -cfg.ref_limit)
    if xi_min > xi_max:
        xi_min = xi_max = 0.5 * (xi_min + xi_max)
    ref = min(max(ref, xi_min), xi_max)
    xi = human_dcm(state, human)
    cop = h * (xi + f_hmi / gamma + (cfg.k_balance / human.omega) * (xi - ref))
    clamped = not (polygon.p_min <= cop <= polygon.p_max)
    return polygon.clamp(cop), clamped


class ScriptedPilot:
    def __init__(
        self,
        script: PilotScript,
        human: HumanParams,
        polygon: SupportPolygon,
        cfg: PilotConfig | None = None,
    ):
        self.script = script
        self.human = human
        self.polygon = polygon
        self.cfg = cfg or PilotConfig()

    def command(
        self,
        t: float,
        human_state: AipState,
        robot_state: CartPoleState,
        f_hmi: float,
        hand_x: float = math.nan,
        target_x: float = math.nan,
    ) -> PilotInput:
        cfg = self.cfg
        ref = self.script.value("theta_h", t, 0.0)
        v_des = self.script.value("v_des", t)
        if (
            cfg.pursuit_gain > 0.0
            and math.isfinite(hand_x)
            and math.isfinite(target_x)
        ):
            # visual chase: close the hand-to-target gap on top of the
            # scripted speed estimate
            v_des = (v_des or 0.0) + cfg.pursuit_gain * (target_x - hand_x)
            v_des = min(max(v_des, -cfg.pursuit_vmax), cfg.pursuit_vmax)
        if v_des is not None:
            ref = ref + cfg.k_velocity * (v_des - robot_state.x_w_dot)

        cop = self.script.value("cop", t)
        if cop is None:
            cop, clamped = balance_cop(
                self.human, self.polygon, cfg, human_state, f_hmi, ref
            )
        else:
            clamped = not (self.polygon.p_min <= cop <= self.polygon.p_max)
            cop = self.polygon.clamp(cop)

        com_disp = self.script.value("com_disp", t)
        if com_disp is None:
            com_disp = self.human.h_com * math.sin(human_state.theta)

        left, right = self.script.arm_refs(t)
        return PilotInput(
            command=HumanCommand(cop=cop, com_disp=com_disp),
            arm_left=ArmJoints(q=left, side="left"),
            arm_right=ArmJoints(q=right, side="right"),
            cop_clamped=clamped,
        )
