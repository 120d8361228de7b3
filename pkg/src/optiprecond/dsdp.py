"""Barrier path-following for the one-sided dual SDP reformulations.

After the change of variable tau = 1/kappa, both one-sided problems maximize
tau over linear matrix inequalities in (tau, d):

  right:  D <= M,          tau M <= D,  d >= 0   (d in R^n, D = diag(d))
  left:   sum_i A_i A_i^T d_i >= tau I, <= I,  d >= 0   (d in R^m, rows A_i)

The solver follows the central path of tau + mu * (sum of cone log-dets),
shrinking mu geometrically and warm-starting each stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .barrier import _chol_pd, _inv_from_chol, _max_step_cone, _solve_pd
from .linalg import SymMatrix, NotPositiveDefiniteError, serial_blas
from .matrixio import RectMatrix, SolveReport


class NewtonFailureError(RuntimeError):
    """Inner Newton maximization failed; carries mu and residual info."""

    def __init__(self, message, mu=None, residual=None):
        super().__init__(message)
        self.mu = mu
        self.residual = residual


@dataclass
class DsdpConfig:
    """Path-following schedule: mu_0 = 1 shrinks by mu_factor down to mu_min."""

    mu_init: float = 1.0
    mu_factor: float = 5.0
    mu_min: float = 1e-9
    newton_cap: int = 50
    decrement_tol: float = 1e-10


@dataclass
class DsdpProblem:
    """One-sided dual SDP instance over (tau, d)."""

    side: str                  # 'left' | 'right'
    gram: np.ndarray | None    # right: M
    a: np.ndarray | None       # left: the (tall) data matrix
    dim_d: int


@dataclass
class PathState:
    """Central-path iterate: barrier weight and strictly feasible (tau, d)."""

    tau: float
    d: np.ndarray
    mu: float


def build_right(m: SymMatrix) -> DsdpProblem:
    """max tau s.t. D <= M, tau M <= D for diagonal D; requires M PD."""
    w = scipy.linalg.eigvalsh(m.mat)
    if w[0] <= 1e-12 * max(w[-1], 0.0):
        raise NotPositiveDefiniteError("right problem needs M PD")
    return DsdpProblem(side="right", gram=m.mat.copy(), a=None,
                       dim_d=m.order)


def build_left(a: RectMatrix) -> DsdpProblem:
    """Left problem over row weights d in R^m; requires full column rank."""
    x = a.mat
    if x.shape[0] < x.shape[1]:
        raise ValueError("left problem expects a tall matrix (m >= n)")
    w = scipy.linalg.eigvalsh(x.T @ x)
    if w[0] <= 1e-12 * max(w[-1], 0.0):
        raise ValueError("matrix is rank deficient")
    return DsdpProblem(side="left", gram=None, a=x.copy(), dim_d=x.shape[0])


class _RightPath:
    """Cones C1 = M - D, C2 = D - tau M, plus d > 0."""

    def __init__(self, m):
        self.m = m
        self.n = m.shape[0]
        self.barrier_dim = 3 * self.n

    def start(self):
        w = scipy.linalg.eigvalsh(self.m)
        lamn, lam1 = float(w[0]), float(w[-1])
        kappa0 = 2.0 * lam1 / lamn
        c = np.sqrt(lam1 * lamn / kappa0)
        return 1.0 / kappa0, np.full(self.n, c)

    def factors(self, tau, d):
        if np.any(d <= 0):
            return None
        l1 = _chol_pd(self.m - np.diag(d))
        l2 = _chol_pd(np.diag(d) - tau * self.m)
        if l1 is None or l2 is None:
            return None
        return l1, l2

    def barrier(self, tau, d, factors):
        l1, l2 = factors
        return (2.0 * float(np.sum(np.log(np.diag(l1))))
                + 2.0 * float(np.sum(np.log(np.diag(l2))))
                + float(np.sum(np.log(d))))

    def grad_hess(self, tau, d, factors, mu):
        l1, l2 = factors
        p = _inv_from_chol(l1)          # (M - D)^{-1}
        q = _inv_from_chol(l2)          # (D - tau M)^{-1}
        qm = q @ self.m
        g_d = mu * (-np.diag(p) + np.diag(q) + 1.0 / d)
        g_tau = 1.0 - mu * float(np.trace(qm))
        h_dd = mu * (-(p * p) - (q * q) - np.diag(1.0 / d ** 2))
        h_tt = -mu * float(np.sum(qm * qm.T))
        h_td = mu * np.einsum("ij,ji->i", qm, q)   # (Q M Q)_ii
        g = np.concatenate([[g_tau], g_d])
        h = np.zeros((self.n + 1, self.n + 1))
        h[0, 0] = h_tt
        h[0, 1:] = h_td
        h[1:, 0] = h_td
        h[1:, 1:] = h_dd
        return g, h

    def max_step(self, tau, d, dtau, dd, factors):
        l1, l2 = factors
        alpha = _max_step_cone(l1, np.diag(dd))
        alpha = min(alpha, _max_step_cone(l2, dtau * self.m - np.diag(dd)))
        neg = dd < 0
        if np.any(neg):
            alpha = min(alpha, float(np.min(d[neg] / -dd[neg])))
        return alpha


class _LeftPath:
    """Cones C1 = G(d) - tau I, C2 = I - G(d) with G = A^T diag(d) A."""

    def __init__(self, a):
        self.a = a
        self.m_rows, self.n = a.shape
        self.barrier_dim = 2 * self.n + self.m_rows

    def start(self):
        w = scipy.linalg.eigvalsh(self.a.T @ self.a)
        lamn, lam1 = float(w[0]), float(w[-1])
        return lamn / (4.0 * lam1), np.full(self.m_rows, 1.0 / (2.0 * lam1))

    def _g(self, d):
        g = self.a.T @ (d[:, None] * self.a)
        return 0.5 * (g + g.T)

    def factors(self, tau, d):
        if np.any(d <= 0):
            return None
        g = self._g(d)
        eye = np.eye(self.n)
        l1 = _chol_pd(g - tau * eye)
        l2 = _chol_pd(eye - g)
        if l1 is None or l2 is None:
            return None
        return l1, l2

    def barrier(self, tau, d, factors):
        l1, l2 = factors
        return (2.0 * float(np.sum(np.log(np.diag(l1))))
                + 2.0 * float(np.sum(np.log(np.diag(l2))))
                + float(np.sum(np.log(d))))

    def grad_hess(self, tau, d, factors, mu):
        l1, l2 = factors
        p = _inv_from_chol(l1)          # (G - tau I)^{-1}
        q = _inv_from_chol(l2)          # (I - G)^{-1}
        ap = self.a @ p
        aq = self.a @ q
        row_p = np.einsum("ij,ij->i", ap, self.a)
        row_q = np.einsum("ij,ij->i", aq, self.a)
        g_d = mu * (row_p - row_q + 1.0 / d)
        g_tau = 1.0 - mu * float(np.trace(p))
        apa = ap @ self.a.T
        aqa = aq @ self.a.T
        h_dd = mu * (-(apa * apa) - (aqa * aqa) - np.diag(1.0 / d ** 2))
        h_tt = -mu * float(np.sum(p * p))
        h_td = mu * np.einsum("ij,ij->i", ap, ap)   # A_i^T P^2 A_i
        g = np.concatenate([[g_tau], g_d])
        h = np.zeros((self.m_rows + 1, self.m_rows + 1))
        h[0, 0] = h_tt
        h[0, 1:] = h_td
        h[1:, 0] = h_td
        h[1:, 1:] = h_dd
        return g, h

    def max_step(self, tau, d, dtau, dd, factors):
        l1, l2 = factors
        dg = self._g(dd) if np.any(dd) else np.zeros((self.n, self.n))
        eye = np.eye(self.n)
        alpha = _max_step_cone(l1, -(dg - dtau * eye))
        alpha = min(alpha, _max_step_cone(l2, dg))
        neg = dd < 0
        if np.any(neg):
            alpha = min(alpha, float(np.min(d[neg] / -dd[neg])))
        return alpha


def _stage_newton(path, tau, d, mu, config):
    """Damped Newton maximization of tau + mu * barrier at fixed mu."""
    factors = path.factors(tau, d)
    if factors is None:
        raise NewtonFailureError("infeasible stage start", mu=mu)
    value = tau + mu * path.barrier(tau, d, factors)
    for _ in range(config.newton_cap):
        g, h = path.grad_hess(tau, d, factors, mu)
        step = _solve_pd(-h, g)
        decrement = float(g @ step)
        if decrement <= config.decrement_tol:
            break
        dtau, dd = step[0], step[1:]
        alpha = 1.0
        accepted = False
        for attempt in range(40):
            t_new = tau + alpha * dtau
            d_new = d + alpha * dd
            f_new = path.factors(t_new, d_new)
            if f_new is not None:
                v_new = t_new + mu * path.barrier(t_new, d_new, f_new)
                if v_new >= value - 1e-12 * (1 + abs(value)):
                    tau, d, factors, value = t_new, d_new, f_new, v_new
                    accepted = True
                    break
            if attempt == 0:
                bound = 0.9 * path.max_step(tau, d, dtau, dd, factors)
                alpha = bound if bound < alpha else 0.5 * alpha
            else:
                alpha *= 0.5
        if not accepted:
            raise NewtonFailureError(
                "line search failed", mu=mu,
                residual=float(np.abs(g).max()))
    return tau, d


def barrier_path_solve(p: DsdpProblem, config: DsdpConfig | None = None
                       ) -> tuple[float, np.ndarray, SolveReport]:
    """Follow the central path to (tau*, d*); returns kappa = 1/tau* in the report."""
    config = config or DsdpConfig()
    t0 = time.perf_counter()
    path = _RightPath(p.gram) if p.side == "right" else _LeftPath(p.a)
    tau, d = path.start()
    if path.factors(tau, d) is None:
        raise NewtonFailureError("strictly feasible start recipe failed",
                                 mu=config.mu_init)
    state = PathState(tau=tau, d=d, mu=config.mu_init)
    stages = 0
    taus = []   # per-stage central path points; tau is monotone along them
    with serial_blas():
        while True:
            tau, d = _stage_newton(path, state.tau, state.d, state.mu,
                                   config)
            state = PathState(tau=tau, d=d, mu=state.mu)
            taus.append(state.tau)
            stages += 1
            if state.mu <= config.mu_min:
                break
            state.mu /= config.mu_factor
    tau, d = state.tau, state.d
    gap_proxy = state.mu * path.barrier_dim
    if p.side == "right":
        w0 = scipy.linalg.eigvalsh(p.gram)
    else:
        w0 = scipy.linalg.eigvalsh(p.a.T @ p.a)
    kappa_before = float(w0[-1] / w0[0])
    report = SolveReport(
        matrix="", method=f"dsdp_{p.side}",
        kappa_before=kappa_before, kappa_after=1.0 / tau,
        iterations=stages, wall_time_seconds=time.perf_counter() - t0,
        extra={"mu_final": state.mu, "duality_gap_proxy": gap_proxy,
               "tau_path": taus})
    return float(tau), d.copy(), report
