"""Contact-force estimation from arm motor torques.

A force applied at a hand induces joint torques J_c' F through the hand
position Jacobian.  Inverting that relation with the Moore-Penrose inverse
of J_c' recovers the tip force from measured torques; a fixed diagonal map
G converts motor-space readings to joint space, the left arm enters with a
mirrored sign, and a selector keeps the sagittal (x) component.  The
estimate is scaled before being shown to the pilot, who otherwise cannot
perceive small force changes at the torso.

Torque-based estimation degrades near Jacobian rank loss and is noisy when
the contact point moves; the session wrapper guards on condition number
and holds the previous estimate rather than extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arms import ArmGeometry, ArmJoints, arm_fk, rot_x, rot_y, shoulder_rotation
from .params import InvalidStateError, ParameterError

# motor-space to joint-space map, fixed by the drivetrain
GEAR_MAP = np.array([-1.0, 1.0, 1.0, -2.0])

# selector for the sagittal component of a 3-vector tip force
X_SELECTOR = np.array([1.0, 0.0, 0.0])

_MIRROR = np.array([1.0, -1.0, 1.0])


@dataclass(frozen=True)
class MotorTorques:
    """Measured motor torques for one arm, N*m."""

    tau_m: np.ndarray
    side: str = "right"

    def __post_init__(self) -> None:
        t = np.asarray(self.tau_m, dtype=float).reshape(4)
        if not np.all(np.isfinite(t)):
            raise InvalidStateError("MotorTorques contains non-finite values")
        object.__setattr__(self, "tau_m", t)


@dataclass(frozen=True)
class ContactEstimate:
    f_ext_hat: float            # N, summed sagittal tip force
    f_ext_scaled: float         # N, k_fb * f_ext_hat
    per_arm: tuple[float, float]  # (right, left) contributions
    held: bool = False          # previous value reused (ill-conditioned pose)


def _cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross has large call overhead for single 3-vectors
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def contact_jacobian(joints: ArmJoints, geom: ArmGeometry) -> np.ndarray:
    """3x4 hand position Jacobian in the torso frame.

    Columns are axis x (hand - origin) for the three shoulder rotations
    (about torso y, then rotated x, then rotated z) and the elbow hinge.
    """
    q = joints.q
    R0 = rot_y(q[0])
    R1 = R0 @ rot_x(q[1])
    R = shoulder_rotation(q[0], q[1], q[2])
    shoulder = geom.shoulder("right")
    elbow = shoulder + geom.l_upper * R[:, 2]
    hand = elbow + geom.l_fore * (R @ rot_y(q[3]))[:, 2]
    axes = [np.array([0.0, 1.0, 0.0]), R0[:, 0], R1[:, 2], R[:, 1]]
    origins = [shoulder, shoulder, shoulder, elbow]
    J = np.column_stack([_cross3(a, hand - o) for a, o in zip(axes, origins)])
    if joints.side == "left":
        J = _MIRROR[:, None] * J
    return J


def tip_force(J: np.ndarray, joint_torques: np.ndarray) -> np.ndarray:
    """Tip force whose induced torques J' F best match the given torques."""
    return np.linalg.pinv(J.T) @ np.asarray(joint_torques, dtype=float)


def estimate_external_force(
    tau_r: MotorTorques,
    tau_l: MotorTorques,
    q_r: ArmJoints,
    q_l: ArmJoints,
    geom: ArmGeometry,
    k_fb: float = 2.5,
) -> ContactEstimate:
    """Sum the per-hand sagittal force estimates from both arms.

    The right arm contributes G tau, the left -G tau (mirrored drivetrain
    sign).  No conditioning guard here; see ForceEstimator for the guarded
    session form.
    """
    if k_fb <= 0:
        raise ParameterError("k_fb must be positive")
    right = float(X_SELECTOR @ tip_force(contact_jacobian(q_r, geom), GEAR_MAP * tau_r.tau_m))
    left = float(X_SELECTOR @ tip_force(contact_jacobian(q_l, geom), -(GEAR_MAP * tau_l.tau_m)))
    total = right + left
    return ContactEstimate(
        f_ext_hat=total, f_ext_scaled=k_fb * total, per_arm=(right, left)
    )


class ForceEstimator:
    """Stateful estimator with a condition-number guard.

    When either arm's Jacobian condition number exceeds the threshold the
    previous estimate is held and flagged.  An optional first-order low
    pass (disabled by default) emulates the hardware smoothing.
    """

    def __init__(
        self,
        geom: ArmGeometry,
        k_fb: float = 2.5,
        cond_limit: float = 1e6,
        lowpass_hz: float | None = None,
        dt: float | None = None,
    ):
        self.geom = geom
        self.k_fb = k_fb
        self.cond_limit = cond_limit
        if lowpass_hz is not None and (dt is None or dt <= 0):
            raise ParameterError("low-pass filtering requires the sample time")
        self._alpha = None
        if lowpass_hz is not None:
            rc = 1.0 / (2.0 * math.pi * lowpass_hz)
            self._alpha = dt / (rc + dt)
        self._last = ContactEstimate(0.0, 0.0, (0.0, 0.0))

    @property
    def last(self) -> ContactEstimate:
        return self._last

    def update(
        self,
        tau_r: MotorTorques,
        tau_l: MotorTorques,
        q_r: ArmJoints,
        q_l: ArmJoints,
    ) -> ContactEstimate:
        per_arm = []
        for q, tau, sign in ((q_r, tau_r, 1.0), (q_l, tau_l, -1.0)):
            J = contact_jacobian(q, self.geom)
            # one SVD serves both the conditioning guard and the inverse
            U, s, Vh = np.linalg.svd(J.T, full_matrices=False)
            if s[-1] <= 0.0 or s[0] / s[-1] > self.cond_limit:
                self._last = ContactEstimate(
                    self._last.f_ext_hat,
                    self._last.f_ext_scaled,
                    self._last.per_arm,
                    held=True,
                )
                return self._last
            torques = sign * (GEAR_MAP * tau.tau_m)
            force = Vh.T @ ((U.T @ torques) / s)
            per_arm.append(float(force[0]))
        total = per_arm[0] + per_arm[1]
        if self._alpha is not None:
            total = self._last.f_ext_hat + self._alpha * (total - self._last.f_ext_hat)
        est = ContactEstimate(total, self.k_fb * total, (per_arm[0], per_arm[1]))
        self._last = est
        return est
