# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=False
"""Compiled plant integrator, arithmetic twin of ``py_plant``.

Expression order matches the pure-Python kernel exactly (and the build
disables floating-point contraction), so trajectories are bit-identical
between the two.  Keep any change synchronized with py_plant.py.
"""

from libc.math cimport cos, sin

KERNEL_NAME = "cython"

DEF N = 22


cdef void _deriv(double* y, double* out,
                 double m_h, double h_h, double M, double m_r, double h_r,
                 double g, double tau_ankle, double f_hmi, double u,
                 double f_ext, double arm_inertia, double kp, double kd,
                 double* q_des, double* tau_ext) noexcept:
    cdef double th_h = y[0]
    cdef double thd_h = y[1]
    cdef double acc_h = (
        g * sin(th_h) / h_h
        + tau_ankle / (m_h * h_h * h_h)
        + cos(th_h) * f_hmi / (m_h * h_h)
    )

    cdef double th_r = y[4]
    cdef double thd_r = y[5]
    cdef double s = sin(th_r)
    cdef double c = cos(th_r)
    cdef double den = M + m_r * s * s
    cdef double common = u + f_ext + m_r * h_r * s * thd_r * thd_r
    cdef double acc_x = (common - m_r * g * s * c - f_ext * c * c) / den
    cdef double acc_th = ((M + m_r) * (g * s + (f_ext / m_r) * c) - c * common) / (h_r * den)

    out[0] = thd_h
    out[1] = acc_h
    out[2] = y[3]
    out[3] = acc_x
    out[4] = thd_r
    out[5] = acc_th
    cdef int i
    for i in range(4):
        out[6 + i] = y[10 + i]
        out[10 + i] = (kp * (q_des[i] - y[6 + i]) - kd * y[10 + i] + tau_ext[i]) / arm_inertia
        out[14 + i] = y[18 + i]
        out[18 + i] = (kp * (q_des[4 + i] - y[14 + i]) - kd * y[18 + i] + tau_ext[4 + i]) / arm_inertia


def rk4_step(y, double dt, double m_h, double h_h, double M, double m_r,
             double h_r, double g, double tau_ankle, double f_hmi, double u,
             double f_ext, double arm_inertia, double kp, double kd,
             q_des, tau_ext):
    """Advance the 22-state tuple by one step of size dt."""
    cdef double yv[N]
    cdef double k1[N]
    cdef double k2[N]
    cdef double k3[N]
    cdef double k4[N]
    cdef double tmp[N]
    cdef double qd[8]
    cdef double te[8]
    cdef int i
    for i in range(N):
        yv[i] = y[i]
    for i in range(8):
        qd[i] = q_des[i]
        te[i] = tau_ext[i]

    _deriv(yv, k1, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
           arm_inertia, kp, kd, qd, te)
    for i in range(N):
        tmp[i] = yv[i] + 0.5 * dt * k1[i]
    _deriv(tmp, k2, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
           arm_inertia, kp, kd, qd, te)
    for i in range(N):
        tmp[i] = yv[i] + 0.5 * dt * k2[i]
    _deriv(tmp, k3, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
           arm_inertia, kp, kd, qd, te)
    for i in range(N):
        tmp[i] = yv[i] + dt * k3[i]
    _deriv(tmp, k4, m_h, h_h, M, m_r, h_r, g, tau_ankle, f_hmi, u, f_ext,
           arm_inertia, kp, kd, qd, te)
    cdef double w = dt / 6.0
    return tuple(
        yv[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(N)
    )
