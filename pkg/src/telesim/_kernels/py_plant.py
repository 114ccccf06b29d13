"""Pure-Python plant integrator (reference kernel).

One RK4 step of the coupled smooth states with all forces held constant:
human pendulum (2), robot cart-pole (4) and the eight arm joints as
inertia-PD double integrators (16).  The compiled twin in ``_plant_cy.pyx``
mirrors this arithmetic expression for expression so both kernels produce
bit-identical trajectories; any change here must be copied there.

State layout (22):
    0 th_h, 1 thd_h, 2 x_w, 3 xd_w, 4 th_r, 5 thd_r,
    6:10 q_left, 10:14 qd_left, 14:18 q_right, 18:22 qd_right
"""

from math import cos, sin

KERNEL_NAME = "python"

N_STATES = 22


def _deriv(y, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
           arm_inertia, kp, kd, q_des, tau_ext):
    th_h = y[0]
    thd_h = y[1]
    acc_h = (
        g * sin(th_h) / h_h
        + tau_ankle / (m_h * h_h * h_h)
        + cos(th_h) * f_hmi / (m_h * h_h)
    )

    th_r = y[4]
    thd_r = y[5]
    s = sin(th_r)
    c = cos(th_r)
    den = M + m_r * s * s
    common = u + f_ext + m_r * h_r * s * thd_r * thd_r
    acc_x = (common - m_r * g * s * c - f_ext * c * c) / den
    acc_th = ((M + m_r) * (g * s + (f_ext / m_r) * c) - c * common) / (h_r * den)

    out = [0.0] * N_STATES
    out[0] = thd_h
    out[1] = acc_h
    out[2] = y[3]
    out[3] = acc_x
    out[4] = thd_r
    out[5] = acc_th
    for i in range(4):
        out[6 + i] = y[10 + i]
        out[10 + i] = (kp * (q_des[i] - y[6 + i]) - kd * y[10 + i] + tau_ext[i]) / arm_inertia
        out[14 + i] = y[18 + i]
        out[18 + i] = (kp * (q_des[4 + i] - y[14 + i]) - kd * y[18 + i] + tau_ext[4 + i]) / arm_inertia
    return out


def rk4_step(y, dt, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
             arm_inertia, kp, kd, q_des, tau_ext):
    """Advance the 22-state tuple by one step of size dt."""
    args = (m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
            arm_inertia, kp, kd, q_des, tau_ext)
    k1 = _deriv(y, *args)
    y2 = [y[i] + 0.5 * dt * k1[i] for i in range(N_STATES)]
    k2 = _deriv(y2, *args)
    y3 = [y[i] + 0.5 * dt * k2[i] for i in range(N_STATES)]
    k3 = _deriv(y3, *args)
    y4 = [y[i] + dt * k3[i] for i in range(N_STATES)]
    k4 = _deriv(y4, *args)
    w = dt / 6.0
    return tuple(
        y[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(N_STATES)
    )
