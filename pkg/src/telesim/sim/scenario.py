"""Scenario configuration and pilot scripts.

A scenario JSON fixes the world (box, moving target), the toggles, and the
pilot script; the parameter profile and retargeting gains come from the
separate config file.  Scripts are CSV time series with columns

    t, theta_h, cop, com_disp, l_q0..l_q3, r_q0..r_q3 [, v_des]

linearly interpolated between rows and held beyond the ends.  Empty cells
mean "not scripted": an empty cop lets the pilot's balance law choose it,
an empty com_disp derives the spring input from the simulated lean, and
v_des (optional trailing column) adds a speed-holding trim to the lean
reference, standing in for the visual feedback a live pilot uses.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..params import ParameterError

SCENARIO_KINDS = ("box_push", "hand_off", "free_balance")

SCRIPT_COLUMNS = [
    "t", "theta_h", "cop", "com_disp",
    "l_q0", "l_q1", "l_q2", "l_q3", "r_q0", "r_q1", "r_q2", "r_q3",
]


def _data_path(name: str) -> Path:
    return Path(str(resources.files("telesim").joinpath("data", name)))


@dataclass(frozen=True)
class TargetConfig:
    x0: float
    speed: float


@dataclass(frozen=True)
class BoxConfig:
    mass: float
    x0: float
    mu_static: float = 0.35
    mu_kinetic: float = 0.30
    width: float = 0.40


@dataclass(frozen=True)
class PilotConfig:
    """Gains of the scripted pilot's balance and speed-trim laws."""

    k_balance: float = 4.0     # 1/s, DCM convergence rate onto the lean reference
    k_velocity: float = 0.6    # rad per m/s of speed error
    margin: float = 0.005      # DCM headroom kept from the support bound
    ref_limit: float = 0.45    # rad, lean reference a pilot will ever command
    pursuit_gain: float = 0.0  # 1/s, visual hand-to-target gap closure (0: off)
    pursuit_vmax: float = 1.0  # m/s, speed the pilot will not exceed while chasing


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    duration: float
    dt: float = 0.002
    box: BoxConfig | None = None
    target: TargetConfig | None = None
    script: str | None = None
    spring_enabled: bool = True
    haptics_enabled: bool = True
    arm_mode: str = "ik"
    contact_stiffness: float = 5000.0  # N/m
    contact_damping: float = 50.0      # N*s/m
    accel_bound: float = 1.5           # m/s^2, box handling limit for reports
    pilot: PilotConfig = field(default_factory=PilotConfig)

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ParameterError(f"unknown scenario kind {self.kind!r}")
        if not 0 < self.dt <= 0.01:
            raise ParameterError("need 0 < dt <= 0.01")
        if self.duration <= 0:
            raise ParameterError("duration must be positive")
        if self.arm_mode not in ("ik", "joint"):
            raise ParameterError("arm_mode must be 'ik' or 'joint'")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def scenario_from_dict(data: dict) -> ScenarioConfig:
    data = dict(data)
    if "box" in data and data["box"] is not None:
        data["box"] = BoxConfig(**data["box"])
    if "target" in data and data["target"] is not None:
        data["target"] = TargetConfig(**data["target"])
    if "pilot" in data and data["pilot"] is not None:
        data["pilot"] = PilotConfig(**data["pilot"])
    return ScenarioConfig(**data)


def load_scenario(name_or_path: str | Path) -> ScenarioConfig:
    """Load a scenario by shipped name (e.g. 'box_push_8p5') or JSON path."""
    p = Path(name_or_path)
    if not p.suffix:
        p = _data_path(f"{p.name}.json")
    if not p.exists():
        raise FileNotFoundError(f"scenario file not found: {p}")
    return scenario_from_dict(json.loads(p.read_text()))


class PilotScript:
    """Interpolated pilot time series."""

    def __init__(self, t: np.ndarray, columns: dict[str, np.ndarray]):
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ParameterError("script needs at least one row")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("script timestamps must be strictly increasing")
        self.t = t
        self.columns = columns

    @classmethod
    def zero(cls) -> "PilotScript":
        return cls(np.array([0.0]), {"theta_h": np.array([0.0])})

    @classmethod
    def load(cls, path: str | Path) -> "PilotScript":
        """Read a script CSV; unknown or empty cells become unscripted."""
        p = Path(path)
        if not p.exists():
            candidate = _data_path(p.name if p.suffix else f"{p.name}.csv")
            if candidate.exists():
                p = candidate
            else:
                raise FileNotFoundError(f"pilot script not found: {path}")
        rows = list(csv.DictReader(p.open()))
        if not rows:
            raise ParameterError(f"empty pilot script: {p}")
        names = [n for n in rows[0] if n != "t"]
        t = np.array([float(r["t"]) for r in rows])
        columns = {}
        for name in names:
            vals = np.array(
                [float(r[name]) if r.get(name, "") not in ("", None) else math.nan for r in rows]
            )
            if np.any(np.isinf(vals)):
                raise ParameterError(f"column {name} contains non-finite values")
            if not np.all(np.isnan(vals)):
                if np.any(np.isnan(vals)) and name in ("theta_h", "v_des"):
                    raise ParameterError(f"column {name} must be fully specified")
                columns[name] = vals
        return cls(t, columns)

    def has(self, name: str) -> bool:
        return name in self.columns

    def value(self, name: str, t: float, default: float | None = None) -> float | None:
        """Linearly interpolated sample, held beyond the ends.

        Returns ``default`` when the column is absent or NaN around ``t``.
        """
        col = self.columns.get(name)
        if col is None:
            return default
        v = float(np.interp(t, self.t, col))
        if math.isnan(v):
            return default
        return v

    def arm_refs(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        left = np.array(
            [self.value(f"l_q{i}", t, 0.0) for i in range(4)]
        )
        right = np.array(
            [self.value(f"r_q{i}", t, 0.0) for i in range(4)]
        )
        return left, right
