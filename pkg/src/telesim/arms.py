"""Kinematic arm retargeting: shoulder-sphere alignment and elbow passthrough.

Both agents carry 4-DoF arms: a 3-DoF shoulder treated as a spherical
joint followed by a 1-DoF elbow hinge.  The retargeting aligns the robot's
shoulder-to-elbow axis with the human's, projects the human elbow rotation
axis onto the plane perpendicular to it, solves the spherical-joint inverse
kinematics for the resulting frame, and copies the elbow angle directly.

Shoulder convention (fixed here; any convention closing the FK/IK round
trip is equivalent): three successive intrinsic rotations about the torso
frame's y (flexion), x (abduction) and z (internal rotation) axes, i.e.
R = Ry(q0) Rx(q1) Rz(q2).  The upper arm points along the rotated z axis,
the elbow hinge along the rotated y axis; at the zero pose the arm points
straight up the torso z axis.  Left-arm quantities are the mirror image of
the right-arm math through the sagittal (xz) plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import InvalidStateError, ParameterError

_MIRROR = np.array([1.0, -1.0, 1.0])


class DegenerateFrameError(ValueError):
    """Elbow axis parallel to the upper-arm axis; no unique projection."""


@dataclass(frozen=True)
class ArmGeometry:
    l_upper: float = 0.25  # m
    l_fore: float = 0.25   # m
    shoulder_offset: tuple = (0.0, -0.18, 0.45)  # m, right shoulder in torso frame

    def __post_init__(self) -> None:
        if self.l_upper <= 0 or self.l_fore <= 0:
            raise ParameterError("link lengths must be positive")

    def shoulder(self, side: str) -> np.ndarray:
        s = np.asarray(self.shoulder_offset, dtype=float)
        return s if side == "right" else s * _MIRROR


@dataclass(frozen=True)
class JointLimits:
    shoulder: float = 2.8            # rad, symmetric bound on q0..q2
    elbow: tuple = (0.0, 2.6)        # rad, hinge range

    def clamp(self, q: np.ndarray) -> tuple[np.ndarray, bool]:
        out = q.copy()
        out[:3] = np.clip(q[:3], -self.shoulder, self.shoulder)
        out[3] = min(max(q[3], self.elbow[0]), self.elbow[1])
        return out, bool(np.any(out != q))


@dataclass(frozen=True)
class ArmJoints:
    """4-vector of joint angles (three shoulder, one elbow) for one arm."""

    q: np.ndarray
    side: str = "right"

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float).reshape(4)
        if not np.all(np.isfinite(q)):
            raise InvalidStateError("ArmJoints contains non-finite angles")
        if self.side not in ("left", "right"):
            raise ParameterError("side must be 'left' or 'right'")
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class ArmFrames:
    """Upper-arm direction and elbow rotation axis, unit vectors."""

    r_z: np.ndarray  # shoulder -> elbow
    r_y: np.ndarray  # elbow hinge axis
    side: str = "right"

    def __post_init__(self) -> None:
        for name in ("r_z", "r_y"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            n = np.linalg.norm(v)
            if not math.isfinite(n) or abs(n - 1.0) > 1e-9:
                raise InvalidStateError(f"{name} must be unit length")
            object.__setattr__(self, name, v)

    @property
    def r_x(self) -> np.ndarray:
        a, b = self.r_y, self.r_z
        return np.array(
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        )

    def rotation(self) -> np.ndarray:
        """Orthonormal [r_x r_y r_z] column matrix."""
        return np.column_stack([self.r_x, self.r_y, self.r_z])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def shoulder_rotation(q0: float, q1: float, q2: float) -> np.ndarray:
    return rot_y(q0) @ rot_x(q1) @ rot_z(q2)


def arm_fk(joints: ArmJoints, geom: ArmGeometry) -> tuple[np.ndarray, np.ndarray, ArmFrames]:
    """(elbow, hand, frames) in the torso frame for one arm."""
    q = joints.q
    R = shoulder_rotation(q[0], q[1], q[2])
    upper = R[:, 2]
    fore = R @ rot_y(q[3])[:, 2]
    shoulder = geom.shoulder("right")
    elbow = shoulder + geom.l_upper * upper
    hand = elbow + geom.l_fore * fore
    if joints.side == "left":
        elbow = elbow * _MIRROR
        hand = hand * _MIRROR
        frames = ArmFrames(r_z=upper * _MIRROR, r_y=R[:, 1] * _MIRROR, side="left")
    else:
        frames = ArmFrames(r_z=upper, r_y=R[:, 1], side="right")
    return elbow, hand, frames


def project_elbow_axis(r_z_h: np.ndarray, r_y_h: np.ndarray, side: str = "right") -> ArmFrames:
    """Adopt the human upper-arm axis and project their elbow axis onto its
    perpendicular plane (closest perpendicular vector, renormalized)."""
    r_z = np.asarray(r_z_h, dtype=float).reshape(3)
    r_y = np.asarray(r_y_h, dtype=float).reshape(3)
    perp = r_y - (r_y @ r_z) * r_z
    norm = np.linalg.norm(perp)
    if norm < 1e-6:
        raise DegenerateFrameError("elbow axis parallel to the upper-arm axis")
    return ArmFrames(r_z=r_z, r_y=perp / norm, side=side)


def _euler_yxz(R: np.ndarray) -> tuple[float, float, float]:
    b = math.asin(min(1.0, max(-1.0, -R[1, 2])))
    a = math.atan2(R[0, 2], R[2, 2])
    c = math.atan2(R[1, 0], R[1, 1])
    return a, b, c


def _unwrap(angle: float, ref: float) -> float:
    return angle + 2.0 * math.pi * round((ref - angle) / (2.0 * math.pi))


def spherical_ik(
    frames: ArmFrames, previous: np.ndarray | None = None
) -> tuple[np.ndarray, bool]:
    """Shoulder angles (q0, q1, q2) reproducing the given frame.

    Returns (angles, singular).  Near the gimbal singularity (middle angle
    at +-pi/2) only the sum/difference of the outer angles is defined; the
    inner rotation is then held at its previous value (zero without one)
    and the flag is set.  Away from it, of the two Euler families the one
    closest to the previous solution is returned, unwrapped modulo 2 pi.
    """
    if frames.side == "left":
        # mirror the axes back into right-arm space where the convention lives
        r_z = frames.r_z * _MIRROR
        r_y = frames.r_y * _MIRROR
        r_x = np.array(
            [
                r_y[1] * r_z[2] - r_y[2] * r_z[1],
                r_y[2] * r_z[0] - r_y[0] * r_z[2],
                r_y[0] * r_z[1] - r_y[1] * r_z[0],
            ]
        )
        R = np.column_stack([r_x, r_y, r_z])
    else:
        R = frames.rotation()
    cos_b = math.hypot(R[1, 0], R[1, 1])
    if cos_b < 1e-6:
        prev = previous if previous is not None else np.zeros(3)
        b = math.copysign(math.pi / 2.0, -R[1, 2])
        c = prev[2]
        if b > 0:
            a = c + math.atan2(R[0, 1], R[0, 0])
        else:
            a = math.atan2(-R[0, 1], R[0, 0]) - c
        return np.array([_unwrap(a, prev[0]), _unwrap(b, prev[1]), c]), True
    a, b, c = _euler_yxz(R)
    candidates = [(a, b, c), (a + math.pi, math.pi - b, c + math.pi)]
    if previous is None:
        return np.array(candidates[0]), False
    best = None
    for cand in candidates:
        q = np.array([_unwrap(v, p) for v, p in zip(cand, previous)])
        miss = np.abs(q - previous).max()
        if best is None or miss < best[1]:
            best = (q, miss)
    return best[0], False


@dataclass(frozen=True)
class PdCommand:
    """Joint-space tracking command; desired velocity and feedforward are zero."""

    q_des: np.ndarray
    kp: np.ndarray
    kd: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.kp < 0) or np.any(self.kd < 0):
            raise ParameterError("PD gains must be nonnegative")


def pd_command(q_des: ArmJoints, kp: float = 20.0, kd: float = 0.5) -> PdCommand:
    return PdCommand(q_des=q_des.q.copy(), kp=np.full(4, float(kp)), kd=np.full(4, float(kd)))


def pd_torque(cmd: PdCommand, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Restoring tracking torque kp (q_des - q) - kd qd, N*m.

    (The source material writes the error with the opposite sign; the
    restoring form is the one that converges, so it is used throughout.)
    """
    return cmd.kp * (cmd.q_des - q) - cmd.kd * np.asarray(qd, dtype=float)


class ArmRetargeter:
    """Per-session retargeting with IK branch continuity and hold-on-failure.

    mode 'ik' runs the shoulder-sphere pipeline; mode 'joint' copies joint
    angles one-to-one (kept for the mapping-comparison plot).
    """

    def __init__(
        self,
        human_geom: ArmGeometry | None = None,
        limits: JointLimits | None = None,
        mode: str = "ik",
    ):
        if mode not in ("ik", "joint"):
            raise ParameterError("mode must be 'ik' or 'joint'")
        self.human_geom = human_geom or ArmGeometry()
        self.limits = limits or JointLimits()
        self.mode = mode
        self._prev: dict[str, np.ndarray] = {}
        self._held: dict[str, ArmJoints] = {}

    def retarget(self, human: ArmJoints) -> tuple[ArmJoints, dict]:
        flags = {"clamped": False, "singular": False, "held": False}
        if self.mode == "joint":
            q = human.q.copy()
        else:
            try:
                _, _, frames = arm_fk(human, self.human_geom)
                frames = project_elbow_axis(frames.r_z, frames.r_y, side=human.side)
            except DegenerateFrameError:
                flags["held"] = True
                held = self._held.get(human.side, ArmJoints(q=np.zeros(4), side=human.side))
                return held, flags
            shoulder, singular = spherical_ik(frames, previous=self._prev.get(human.side))
            flags["singular"] = singular
            self._prev[human.side] = shoulder
            q = np.concatenate([shoulder, [human.q[3]]])
        q, flags["clamped"] = self.limits.clamp(q)
        out = ArmJoints(q=q, side=human.side)
        self._held[human.side] = out
        return out, flags
