"""Top-level JSON configuration: parameter profiles and channel gains.

One file carries the model profile and the retargeting configuration:

    {"human": {...}, "robot": {...}, "support_polygon": {...},
     "retarget": {...}}

Missing sections fall back to the built-in defaults.  SI units throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .params import (
    HumanParams,
    RobotParams,
    SupportPolygon,
    profile_from_dict,
)
from .retarget import RetargetConfig


@dataclass(frozen=True)
class Config:
    human: HumanParams
    robot: RobotParams
    support_polygon: SupportPolygon
    retarget: RetargetConfig

    def as_dict(self) -> dict:
        return {
            "human": {
                "m_body": self.human.m_body,
                "h_com": self.human.h_com,
                "h_ankle": self.human.h_ankle,
                "g": self.human.g,
            },
            "robot": {
                "m_body": self.robot.m_body,
                "m_base": self.robot.m_base,
                "h_com": self.robot.h_com,
                "g": self.robot.g,
                "wheel_radius": self.robot.wheel_radius,
            },
            "support_polygon": {
                "p_min": self.support_polygon.p_min,
                "p_max": self.support_polygon.p_max,
            },
            "retarget": {
                "k_spring": self.retarget.k_spring,
                "k_fb": self.retarget.k_fb,
                "spring_enabled": self.retarget.spring_enabled,
                "lqr_q": list(self.retarget.lqr_q),
                "lqr_r": self.retarget.lqr_r,
                "effort_saturation": self.retarget.effort_saturation,
            },
        }


def config_from_dict(data: dict) -> Config:
    human, robot, polygon = profile_from_dict(data)
    rt = dict(data.get("retarget", {}))
    if "lqr_q" in rt:
        rt["lqr_q"] = tuple(tuple(r) if isinstance(r, list) else r for r in rt["lqr_q"])
    return Config(
        human=human, robot=robot, support_polygon=polygon,
        retarget=RetargetConfig(**rt),
    )


def load_config(path: str | Path | None = None) -> Config:
    if path is None:
        return config_from_dict({})
    return config_from_dict(json.loads(Path(path).read_text()))
