"""Continuous algebraic Riccati equation solver (Newton-Kleinman).

Solves A'P + PA - P B R^-1 B' P + Q = 0 for the gain K = R^-1 B' P.

The balance controller weights only the divergent component by default, so
Q is singular and its zero-cost states (wheel position and velocity, a
marginally stable chain) are unobservable through the cost.  The standard
stabilizing CARE solution does not exist in that case; the right answer is
the structured one that is zero on the cost-free subspace.  We therefore
split the state space along the subspace unobservable through Q (which is
A-invariant by construction), require it to hold no unstable modes, solve
the reduced well-posed CARE by Newton-Kleinman iteration started from a
Bass-stabilized gain, and embed the result back.  The returned gain then
has exactly zero entries for the cost-free states.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_continuous_lyapunov


class RiccatiError(RuntimeError):
    """Synthesis failure; carries the best-effort residual when available."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


def care_residual(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray,
                  P: np.ndarray) -> float:
    """Max-abs entry of the CARE defect for a candidate P."""
    S = B @ np.linalg.solve(R, B.T)
    return float(np.abs(A.T @ P + P @ A - P @ S @ P + Q).max())


def cost_observability_split(A: np.ndarray, Q: np.ndarray, tol: float):
    """Orthonormal bases (N, O) of the subspaces unobservable/observable
    through the cost, with N the kernel of the observability map of (A, C),
    C'C = Q.

    Diagonal Q is split structurally (influence-graph closure over the
    sparsity of A) so the cost-free coordinates come out exact; a general Q
    falls back to an SVD of the observability matrix.
    """
    n = A.shape[0]
    Qs = 0.5 * (Q + Q.T)
    w = np.linalg.eigvalsh(Qs)
    if w.min() < -tol * max(1.0, w.max()):
        raise RiccatiError(f"Q is not positive semidefinite (min eig {w.min():.3e})")

    eye = np.eye(n)
    if not np.any(Qs - np.diag(np.diag(Qs))):
        observable = np.diag(Qs) > tol * max(1.0, float(np.abs(Qs).max()))
        # x_j is cost-observable when it is weighted or drives an
        # observable coordinate through A; iterate to the closure
        for _ in range(n):
            grown = observable | np.any(A[observable] != 0.0, axis=0)
            if np.array_equal(grown, observable):
                break
            observable = grown
        return eye[:, ~observable], eye[:, observable]

    wq, V = np.linalg.eigh(Qs)
    keep = wq > tol * max(1.0, wq.max())
    C = np.sqrt(wq[keep])[:, None] * V[:, keep].T
    if C.shape[0] == 0:
        return eye, np.zeros((n, 0))
    blocks = [C]
    M = C
    for _ in range(n - 1):
        M = M @ A
        blocks.append(M)
    obs = np.vstack(blocks)
    _, s, Vh = np.linalg.svd(obs)
    rank = int(np.sum(s > tol * max(1.0, s[0]) * max(obs.shape)))
    return Vh[rank:].T, Vh[:rank].T


def solve_care(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray,
               tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Solve the CARE, returning the symmetric PSD solution P.

    Raises RiccatiError when (A, B) is not stabilizable, Q is invalid, or a
    cost-free subspace carries an unstable mode.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = A.shape[0]
    if np.linalg.eigvalsh(0.5 * (R + R.T)).min() <= 0:
        raise RiccatiError("R must be positive definite")

    N_basis, O_basis = cost_observability_split(A, Q, tol=1e-12)
    if N_basis.shape[1]:
        ann = N_basis.T @ A @ N_basis
        if np.real(np.linalg.eigvals(ann)).max() > 1e-9:
            raise RiccatiError("unstable mode carries no cost weight; Q is degenerate")
    if O_basis.shape[1] == 0:
        return np.zeros((n, n))

    A2 = O_basis.T @ A @ O_basis
    B2 = O_basis.T @ B
    Q2 = O_basis.T @ Q @ O_basis
    P2 = _kleinman(A2, B2, 0.5 * (Q2 + Q2.T), R, tol, max_iter)
    P = O_basis @ P2 @ O_basis.T
    P = 0.5 * (P + P.T)
    res = care_residual(A, B, Q, R, P)
    if not np.isfinite(res) or res > 1e-6 * max(1.0, float(np.abs(Q).max())):
        raise RiccatiError("iteration did not converge", residual=res)
    return P


def _bass_stabilizing_gain(A: np.ndarray, B: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Initial gain with A - B K strictly Hurwitz (Bass' method)."""
    n = A.shape[0]
    abscissa = np.real(np.linalg.eigvals(A)).max()
    if abscissa < -1e-9:
        return np.zeros((B.shape[1], n))
    beta = 2.0 * float(np.linalg.norm(A, "fro")) + 1.0
    S = B @ np.linalg.solve(R, B.T)
    try:
        Z = solve_continuous_lyapunov(A + beta * np.eye(n), 2.0 * S)
        K = np.linalg.solve(R, B.T) @ np.linalg.inv(Z)
    except np.linalg.LinAlgError as exc:
        raise RiccatiError(f"(A, B) not stabilizable: {exc}") from exc
    if np.real(np.linalg.eigvals(A - B @ K)).max() >= 0:
        raise RiccatiError("(A, B) not stabilizable: Bass initialization failed")
    return K


def _kleinman(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray,
              tol: float, max_iter: int) -> np.ndarray:
    K = _bass_stabilizing_gain(A, B, R)
    P_prev = None
    for _ in range(max_iter):
        Acl = A - B @ K
        rhs = -(Q + K.T @ R @ K)
        P = solve_continuous_lyapunov(Acl.T, rhs)
        P = 0.5 * (P + P.T)
        K = np.linalg.solve(R, B.T @ P)
        if P_prev is not None:
            step = np.abs(P - P_prev).max() / max(1.0, np.abs(P).max())
            if step < tol:
                return P
        P_prev = P
    res = care_residual(A, B, Q, R, P)
    if res < 1e-8 * max(1.0, float(np.abs(Q).max())):
        return P
    raise RiccatiError("Kleinman iteration exhausted", residual=res)


def lqr_gain(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray):
    """(K, P, residual) for the infinite-horizon regulator u = -K x."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = solve_care(A, B, Q, R)
    K = np.linalg.solve(R, B.T @ P)
    return K, P, care_residual(A, B, Q, R, P)
