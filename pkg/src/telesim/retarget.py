"""Dynamic locomotion retargeting between the human and robot pendulums.

The mapping keeps the normalized DCM rates of the two systems equal.
Expanding that constraint through both models' dynamics couples them as

    xi_R - F_R/gamma_R + F_ext/(alpha^2 gamma_R)
        = xi_H - cop/h_H + F_HMI/gamma_H

and the shipped split sends the human CoP to the robot as a feedforward
cart force while returning everything else to the pilot as a haptic force.
``similarity_residual`` evaluates LHS - RHS and is identically zero for
that split (with or without the virtual-spring augmentation); it is logged
each step as a telemetry diagnostic.

The tracking controller is an LQR over [x_w, x_w_dot, xi_R].  Wheel states
carry no cost weight by default: position/velocity tracking winds up
against external forces (box contact) and causes wheel slip, so only the
divergent component is regulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import CartPoleState, AipState, HumanParams, ParameterError, RobotParams
from .riccati import RiccatiError, care_residual, cost_observability_split, lqr_gain
from .rom import human_dcm, robot_dcm


@dataclass(frozen=True)
class RetargetConfig:
    """Gains of the bilateral channel."""

    k_spring: float = 400.0   # N/m, virtual spring on the pilot CoM
    k_fb: float = 2.5         # scaling of the estimated contact force to the pilot
    spring_enabled: bool = True
    lqr_q: tuple = (0.0, 0.0, 300.0)  # diag weights or full 3x3 rows
    lqr_r: float = 1.0
    effort_saturation: float = 40.0  # N, wheel effort clamp

    def __post_init__(self) -> None:
        if self.k_spring < 0:
            raise ParameterError("k_spring must be >= 0")
        if self.k_fb <= 0:
            raise ParameterError("k_fb must be positive")
        if self.lqr_r <= 0:
            raise ParameterError("lqr_r must be positive")
        if self.effort_saturation <= 0:
            raise ParameterError("effort_saturation must be positive")

    def q_matrix(self) -> np.ndarray:
        q = np.asarray(self.lqr_q, dtype=float)
        Q = np.diag(q) if q.ndim == 1 else q
        if Q.shape != (3, 3):
            raise ParameterError("lqr_q must be a 3-vector of diagonal weights or 3x3")
        if not np.allclose(Q, Q.T):
            raise ParameterError("lqr_q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12:
            raise ParameterError("lqr_q must be positive semidefinite")
        return Q


@dataclass(frozen=True)
class ForceExchange:
    """One snapshot of the bilateral force channel, N."""

    f_r: float = 0.0           # feedforward cart force to the robot
    f_hmi: float = 0.0         # haptic force applied to the pilot torso
    f_s: float = 0.0           # virtual spring force
    f_ext: float = 0.0         # true external force on the robot CoM
    f_ext_scaled: float = 0.0  # scaled contact estimate shown to the pilot


@dataclass(frozen=True)
class LqrGain:
    """Synthesized tracking gain over [x_w, x_w_dot, xi_R]."""

    k: np.ndarray                 # (3,) feedback row, u = -k . (z - z_ref)
    p: np.ndarray                 # (3, 3) Riccati solution
    residual: float               # CARE defect, max-abs entry
    closed_loop_eigs: np.ndarray  # eigenvalues on the cost-weighted subspace
    wheel_radius: float

    def __post_init__(self) -> None:
        if np.real(self.closed_loop_eigs).max() >= 0:
            raise ParameterError("closed loop is not stable on the controlled subspace")


@dataclass(frozen=True)
class WheelCommand:
    effort: float          # N, cart-force units
    effort_torque: float   # N*m, effort * wheel_radius (reporting only)
    saturated: bool = False


def feedforward_force(cop: float, human: HumanParams, robot: RobotParams) -> float:
    """Cart force mirroring the pilot's ankle effort, (gamma_R/h_H) * cop."""
    return (robot.gamma / human.h_com) * cop


def haptic_feedback(
    robot_state: CartPoleState,
    human_state: AipState,
    f_ext: float,
    human: HumanParams,
    robot: RobotParams,
) -> float:
    """Force on the pilot torso: normalized tracking error plus scaled contact."""
    tracking = (robot_state.theta - human_state.theta) + (
        robot_state.theta_dot / robot.omega_circ - human_state.theta_dot / human.omega
    )
    return human.gamma * tracking + (human.gamma / (robot.alpha ** 2 * robot.gamma)) * f_ext


def apply_spring(
    f_r: float,
    f_hmi: float,
    com_disp: float,
    cfg: RetargetConfig,
    human: HumanParams,
    robot: RobotParams,
) -> tuple[float, float, float]:
    """Augment both channel sides with the virtual spring.

    Returns (f_r', f_hmi', f_s).  The spring resists the pilot's lean;
    the effort spent against it is credited to the robot feedforward, so a
    forward lean yields both a restoring push on the pilot and a larger
    drive force on the robot.  Identity when disabled.
    """
    if not cfg.spring_enabled:
        return f_r, f_hmi, 0.0
    f_s = -cfg.k_spring * com_disp
    return f_r - (robot.gamma / human.gamma) * f_s, f_hmi + f_s, f_s


def transformed_system(robot: RobotParams) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) of the controller states [x_w, x_w_dot, xi_R].

    Obtained from the linearized cart-pole by the change of variables
    xi = theta + theta_dot/omega_circ, zeta = theta - theta_dot/omega_circ
    and truncation of the convergent mode zeta (theta -> xi/2 in the cart
    acceleration row).  The xi row is exact.
    """
    m, M, h, g = robot.m_body, robot.m_base, robot.h_com, robot.g
    wc = robot.omega_circ
    A = np.array(
        [
            [0.0, 1.0, 0.0],
            [0.0, 0.0, -(m / M) * g / 2.0],
            [0.0, 0.0, wc],
        ]
    )
    B = np.array([[0.0], [1.0 / M], [-1.0 / (wc * M * h)]])
    return A, B


def synthesize_lqr(robot: RobotParams, cfg: RetargetConfig) -> LqrGain:
    """Solve the Riccati equation for the DCM tracking gain.

    With the default weights (zero on the wheel states) the returned gain
    has exactly zero wheel entries; position and velocity are deliberately
    untracked.
    """
    A, B = transformed_system(robot)
    Q = cfg.q_matrix()
    R = np.array([[cfg.lqr_r]])
    try:
        K, P, residual = lqr_gain(A, B, Q, R)
    except RiccatiError as exc:
        raise RiccatiError(f"LQR synthesis failed: {exc}", residual=exc.residual) from exc
    # stability is asserted on the subspace the cost actually weights
    _, obs = cost_observability_split(A, Q, tol=1e-12)
    acl = obs.T @ (A - B @ K) @ obs
    eigs = np.linalg.eigvals(acl) if acl.size else np.array([-1.0])
    return LqrGain(
        k=K.reshape(3),
        p=P,
        residual=residual,
        closed_loop_eigs=eigs,
        wheel_radius=robot.wheel_radius,
    )


def wheel_effort(
    gain: LqrGain,
    xi_h: float,
    xi_r: float,
    f_r: float,
    robot_state: CartPoleState,
    saturation: float,
) -> WheelCommand:
    """Tracking effort -K.(z - z_ref) plus the feedforward force, clamped.

    z = [x_w, x_w_dot, xi_R], z_ref = [0, 0, xi_H]; the wheel-state terms
    are carried but vanish under the default weights.
    """
    err = (
        gain.k[0] * robot_state.x_w
        + gain.k[1] * robot_state.x_w_dot
        + gain.k[2] * (xi_r - xi_h)
    )
    effort = -err + f_r
    saturated = abs(effort) > saturation
    if saturated:
        effort = math.copysign(saturation, effort)
    return WheelCommand(
        effort=effort, effort_torque=effort * gain.wheel_radius, saturated=saturated
    )


def similarity_residual(
    robot_state: CartPoleState,
    human_state: AipState,
    cop: float,
    f_r: float,
    f_hmi: float,
    f_ext: float,
    human: HumanParams,
    robot: RobotParams,
) -> float:
    """LHS - RHS of the normalized DCM-rate coupling, a telemetry diagnostic."""
    lhs = (
        robot_dcm(robot_state, robot)
        - f_r / robot.gamma
        + f_ext / (robot.alpha ** 2 * robot.gamma)
    )
    rhs = human_dcm(human_state, human) - cop / human.h_com + f_hmi / human.gamma
    return lhs - rhs


def legacy_velocity_reference(
    theta_trace: np.ndarray, dt: float, g: float = 9.81
) -> tuple[np.ndarray, np.ndarray]:
    """Open integration of g*theta into velocity and position references.

    This is the superseded mapping kept for comparison runs: the reference
    drifts without bound under a held lean, which is what caused wheel slip
    against unknown loads.  Trapezoidal rule on a uniform grid.
    """
    theta = np.asarray(theta_trace, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise ParameterError("theta_trace must be a 1-D series of length >= 2")
    acc = g * theta
    v = np.concatenate(([0.0], np.cumsum(0.5 * (acc[1:] + acc[:-1]) * dt)))
    x = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * dt)))
    return v, x
