"""Dynamics of the two reduced-order models and their divergent components.

The robot is a planar cart-pole: base mass M driven by a horizontal force u,
point-mass body m on a massless leg of length h, and a horizontal
disturbance F applied at the body CoM.  The linearized form drops the base
mass against the body mass in the gravity feedback term (m >> M), which is
what makes its pitch block diagonalize with rate ``omega_circ``; the
nonlinear form keeps the full coupling so that leaning against an obstacle
produces a sustained contact force, as the physical robot does.

The human is an ankle-actuated inverted pendulum.  Forward CoP brakes a
forward fall, hence the minus sign in the DCM rate.

The divergent component of motion (DCM) of either pendulum is
``theta + theta_dot / omega_eff``; holding it inside the scaled support
interval is the balance condition.
"""

from __future__ import annotations

import math

import numpy as np

from .params import (
    AipState,
    CartPoleState,
    HumanParams,
    InvalidStateError,
    ParameterError,
    RobotParams,
    SupportPolygon,
)


def dcm(theta: float, theta_dot: float, omega_eff: float) -> float:
    """Dimensionless divergent component theta + theta_dot/omega_eff.

    Pass ``omega_circ`` for the robot and ``omega`` for the human.
    """
    if omega_eff <= 0:
        raise ParameterError("omega_eff must be positive")
    if not (math.isfinite(theta) and math.isfinite(theta_dot)):
        raise InvalidStateError("non-finite pendulum state")
    return theta + theta_dot / omega_eff


def human_dcm(state: AipState, human: HumanParams) -> float:
    return dcm(state.theta, state.theta_dot, human.omega)


def robot_dcm(state: CartPoleState, robot: RobotParams) -> float:
    return dcm(state.theta, state.theta_dot, robot.omega_circ)


def aip_derivative(
    state: AipState,
    human: HumanParams,
    tau: float,
    f_hmi: float,
    linearized: bool = False,
) -> AipState:
    """Time derivative of the human pendulum state.

    ``tau`` is the ankle torque in the forward-positive pitch sense (a
    restoring push from a forward CoP is negative here); ``f_hmi`` is the
    horizontal feedback force on the torso.  The linearized form uses the
    full CoM height (ankle height is negligible against it); the nonlinear
    form keeps the pivot-to-CoM length.
    """
    if human.h_tilde <= 0:
        raise ParameterError("pivot-to-CoM length must be positive")
    th, thd = state.theta, state.theta_dot
    if linearized:
        h = human.h_com
        acc = human.omega ** 2 * th + tau / (human.m_body * h * h) + f_hmi / (human.m_body * h)
    else:
        ht = human.h_tilde
        acc = (
            human.g * math.sin(th) / ht
            + tau / (human.m_body * ht * ht)
            + math.cos(th) * f_hmi / (human.m_body * ht)
        )
    return AipState(theta=thd, theta_dot=acc)


def cartpole_derivative(
    state: CartPoleState,
    robot: RobotParams,
    u: float,
    f_ext: float,
    linearized: bool = False,
) -> CartPoleState:
    """Time derivative of the robot cart-pole state.

    The linearized form is the small-angle model the retargeting math is
    built on (gravity feedback m*g/(M*h), disturbance entering the pitch
    row only).  The nonlinear form is the standard planar cart-pole with
    the disturbance applied horizontally at the CoM.
    """
    m, M, h, g = robot.m_body, robot.m_base, robot.h_com, robot.g
    th, thd = state.theta, state.theta_dot
    if linearized:
        x_acc = -(m / M) * g * th + u / M
        th_acc = (m * g) / (M * h) * th - u / (M * h) + f_ext / (m * h)
    else:
        s, c = math.sin(th), math.cos(th)
        den = M + m * s * s
        common = u + f_ext + m * h * s * thd * thd
        x_acc = (common - m * g * s * c - f_ext * c * c) / den
        th_acc = ((M + m) * (g * s + (f_ext / m) * c) - c * common) / (h * den)
    return CartPoleState(x_w=state.x_w_dot, x_w_dot=x_acc, theta=thd, theta_dot=th_acc)


def human_dcm_rate(xi: float, cop: float, human: HumanParams) -> float:
    """d(xi)/dt of the human pendulum under ankle actuation via the CoP."""
    return human.omega * xi - (human.omega / human.h_com) * cop


def robot_dcm_rate(xi: float, cart_force: float, robot: RobotParams) -> float:
    """d(xi)/dt of the cart-pole pitch subsystem under a cart force."""
    wc = robot.omega_circ
    return wc * xi - cart_force / (wc * robot.m_base * robot.h_com)


def dcm_within_support(state: AipState, human: HumanParams, poly: SupportPolygon) -> bool:
    """Balance condition: DCM inside the height-scaled CoP interval.

    Boundary values count as balanced (closed interval).
    """
    xi = human_dcm(state, human)
    return poly.p_min / human.h_com <= xi <= poly.p_max / human.h_com


def linearized_state_matrix(robot: RobotParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A, B_u, B_f) of the linearized cart-pole over [x, x_dot, theta, theta_dot]."""
    m, M, h, g = robot.m_body, robot.m_base, robot.h_com, robot.g
    A = np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -(m / M) * g, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, (m * g) / (M * h), 0.0],
        ]
    )
    B_u = np.array([0.0, 1.0 / M, 0.0, -1.0 / (M * h)])
    B_f = np.array([0.0, 0.0, 0.0, 1.0 / (m * h)])
    return A, B_u, B_f


def cartpole_energy(state: CartPoleState, robot: RobotParams) -> float:
    """Total mechanical energy of the nonlinear cart-pole, J.

    Conserved when u = f_ext = 0; used as an integration oracle.
    """
    m, M, h, g = robot.m_body, robot.m_base, robot.h_com, robot.g
    xd, th, thd = state.x_w_dot, state.theta, state.theta_dot
    kinetic = 0.5 * (M + m) * xd * xd + m * h * math.cos(th) * xd * thd + 0.5 * m * h * h * thd * thd
    return kinetic + m * g * h * math.cos(th)
