"""World state and telemetry schema for the closed-loop simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from ..contact import ContactEstimate
from ..params import AipState, CartPoleState, ParameterError


class SimulationDiverged(RuntimeError):
    """A state became non-finite; carries the offending field name."""

    def __init__(self, field_name: str, t: float):
        super().__init__(f"simulation diverged at t={t:.3f}s: {field_name} is non-finite")
        self.field_name = field_name
        self.t = t


@dataclass(frozen=True)
class BoxState:
    """Rigid box sliding on the ground, pushed along x."""

    mass: float
    position: float        # m, center
    velocity: float = 0.0
    mu_static: float = 0.35
    mu_kinetic: float = 0.30
    width: float = 0.40
    in_contact: bool = False

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ParameterError("box mass must be positive")
        if not 0 <= self.mu_kinetic <= self.mu_static:
            raise ParameterError("need 0 <= mu_kinetic <= mu_static")

    @property
    def face(self) -> float:
        """x of the near (pushed) face."""
        return self.position - self.width / 2.0


@dataclass(frozen=True)
class WorldFlags:
    saturated: bool = False
    cop_clamped: bool = False
    arm_clamped: bool = False
    singular: bool = False
    linear_regime_violated: bool = False
    estimator_held: bool = False
    balanced: bool = True


@dataclass(frozen=True)
class WorldState:
    """One snapshot of every integrated state."""

    t: float
    human: AipState
    robot: CartPoleState
    box: BoxState | None
    arm_q_l: np.ndarray
    arm_qd_l: np.ndarray
    arm_q_r: np.ndarray
    arm_qd_r: np.ndarray
    estimate: ContactEstimate = field(default_factory=lambda: ContactEstimate(0.0, 0.0, (0.0, 0.0)))


def initial_world(box: BoxState | None = None) -> WorldState:
    return WorldState(
        t=0.0,
        human=AipState(),
        robot=CartPoleState(),
        box=box,
        arm_q_l=np.zeros(4),
        arm_qd_l=np.zeros(4),
        arm_q_r=np.zeros(4),
        arm_qd_r=np.zeros(4),
    )


# Column order of the telemetry CSV and of StateMessage frames; see
# docs/telemetry.md.  Flags are serialized as 0/1.
TELEMETRY_FIELDS = [
    "t",
    "theta_h", "theta_dot_h", "xi_h", "cop", "com_disp",
    "x_w", "x_w_dot", "theta_r", "theta_dot_r", "xi_r",
    "box_x", "box_v", "box_contact", "hand_x", "target_x",
    "f_r", "f_hmi", "f_s", "f_ext", "f_ext_hat", "f_ext_scaled",
    "wheel_effort", "wheel_torque", "residual",
    "saturated", "cop_clamped", "arm_clamped", "singular",
    "linear_regime_violated", "estimator_held", "balanced",
    "l_q0", "l_q1", "l_q2", "l_q3", "r_q0", "r_q1", "r_q2", "r_q3",
]

_FLAG_FIELDS = {
    "box_contact", "saturated", "cop_clamped", "arm_clamped", "singular",
    "linear_regime_violated", "estimator_held", "balanced",
}


@dataclass(frozen=True)
class TelemetryFrame:
    t: float
    theta_h: float
    theta_dot_h: float
    xi_h: float
    cop: float
    com_disp: float
    x_w: float
    x_w_dot: float
    theta_r: float
    theta_dot_r: float
    xi_r: float
    box_x: float
    box_v: float
    box_contact: bool
    hand_x: float
    target_x: float
    f_r: float
    f_hmi: float
    f_s: float
    f_ext: float
    f_ext_hat: float
    f_ext_scaled: float
    wheel_effort: float
    wheel_torque: float
    residual: float
    saturated: bool
    cop_clamped: bool
    arm_clamped: bool
    singular: bool
    linear_regime_violated: bool
    estimator_held: bool
    balanced: bool
    l_q0: float
    l_q1: float
    l_q2: float
    l_q3: float
    r_q0: float
    r_q1: float
    r_q2: float
    r_q3: float

    def row(self) -> str:
        parts = []
        for name in TELEMETRY_FIELDS:
            v = getattr(self, name)
            parts.append(str(int(v)) if name in _FLAG_FIELDS else repr(float(v)))
        return ",".join(parts)

    def as_dict(self) -> dict:
        out = {}
        for name in TELEMETRY_FIELDS:
            v = getattr(self, name)
            out[name] = bool(v) if name in _FLAG_FIELDS else float(v)
        return out


assert [f.name for f in fields(TelemetryFrame)] == TELEMETRY_FIELDS


def telemetry_header() -> str:
    return ",".join(TELEMETRY_FIELDS)


def write_telemetry_csv(frames, path) -> None:
    """Deterministic CSV: shortest round-trip float repr, fixed columns."""
    with open(path, "w") as fh:
        fh.write(telemetry_header() + "\n")
        for frame in frames:
            fh.write(frame.row() + "\n")


def telemetry_array(frames, *names) -> np.ndarray:
    """Column-stacked float view of selected telemetry fields."""
    cols = [np.array([float(getattr(f, n)) for f in frames]) for n in names]
    return cols[0] if len(cols) == 1 else np.column_stack(cols)
