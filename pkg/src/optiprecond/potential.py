"""Potential reduction interior point solvers with Nesterov-Todd steps.

Two modes share the machinery. Full-matrix mode lets the scaling variable be
any symmetric PD matrix, for which the center identity Z + kappa Y = X and
the Newton-step proximity contraction hold verbatim; it exists so those
statements can be tested directly. Diagonal-restricted mode constrains the
step to diagonal coordinates (projecting the NT operator onto them) and is
the production path that actually produces diagonal preconditioners.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .barrier import (
    BarrierPoint,
    CenteringError,
    _chol_pd,
    _inv_from_chol,
    _max_step_cone,
    _ShiftedBarrier,
    _solve_pd,
    compute_center,
    initial_feasible_point,
)
from .heuristics import DiagScaling, SIDE_RIGHT
from .linalg import SymMatrix, NotPositiveDefiniteError, serial_blas
from .matrixio import SolveReport

MODE_FULL = "full"
MODE_DIAG = "diag"


class StepTooLargeError(RuntimeError):
    """A kappa shift pushed the slack matrix S out of the PSD cone."""


class StagnationError(RuntimeError):
    """The outer loop stopped making progress; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class PRConfig:
    """Step-size and termination parameters for potential reduction."""

    beta: float = 0.1
    delta_cap: float = 0.25
    kappa_tol: float = 1e-3
    max_outer: int = 10000

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.delta_cap < 1:
            raise ValueError("delta_cap must lie in (0, 1)")


def _delta(a, b):
    """Proximity ||b^{1/2} a b^{1/2} - I||_F for symmetric a, PD b."""
    w, v = scipy.linalg.eigh(b)
    if w[0] <= 0:
        return np.inf
    bh = (v * np.sqrt(w)) @ v.T
    inner = bh @ a @ bh
    return float(np.linalg.norm(inner - np.eye(a.shape[0]), ord="fro"))


def _sym_pow(a, power):
    w, v = scipy.linalg.eigh(a)
    if w[0] <= 0:
        raise NotPositiveDefiniteError("matrix power needs a PD argument")
    return (v * w ** power) @ v.T


def _geometric_mean(rho, xi):
    """U = rho^{1/2} (rho^{1/2} xi rho^{1/2})^{-1/2} rho^{1/2}; U xi U = rho."""
    rh = _sym_pow(rho, 0.5)
    inner = rh @ xi @ rh
    return rh @ _sym_pow(0.5 * (inner + inner.T), -0.5) @ rh


@dataclass
class NTScalings:
    """Geometric-mean scaling points for the three cone pairs."""

    U: np.ndarray
    V: np.ndarray
    W: np.ndarray


@dataclass
class CenterState:
    """Interior-point state (R, S, D, X, Y, Z, kappa) with proximities.

    Maintains S = kappa D - M and the linear identity Z + kappa Y = X; in
    diagonal-restricted mode D stays diagonal and the identity's diagonal
    projection is the barrier gradient.
    """

    m: np.ndarray
    kappa: float
    D: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    mode: str = MODE_FULL

    @property
    def R(self) -> np.ndarray:
        return self.m - self.D

    @property
    def S(self) -> np.ndarray:
        return self.kappa * self.D - self.m

    def deltas(self):
        """(delta_RX, delta_SY, delta_DZ)."""
        return (_delta(self.X, self.R), _delta(self.Y, self.S),
                _delta(self.Z, self.D))

    def identity_residual(self) -> float:
        """Relative residual of Z + kappa Y = X (full) or its diagonal."""
        res = self.Z + self.kappa * self.Y - self.X
        scale = max(np.linalg.norm(self.X, ord="fro"), 1e-300)
        if self.mode == MODE_DIAG:
            return float(np.linalg.norm(np.diag(res)) / scale)
        return float(np.linalg.norm(res, ord="fro") / scale)

    def validate(self, rtol: float = 1e-8):
        for name, mat in (("R", self.R), ("S", self.S), ("D", self.D)):
            if _chol_pd(mat + rtol * np.linalg.norm(mat) * np.eye(len(mat))) \
                    is None:
                raise NotPositiveDefiniteError(f"{name} left the PSD cone")
        if self.identity_residual() > rtol:
            raise ValueError("linear identity Z + kappa Y = X violated")


def exact_center_full(m: SymMatrix, kappa: float, tol: float = 1e-12,
                      max_iter: int = 200) -> np.ndarray:
    """Unrestricted symmetric analytic center: -R^{-1} + kappa S^{-1} + D^{-1} = 0.

    Matrix-variable Newton with a vectorized (Kronecker) solve; intended for
    the small orders used by the proposition tests.
    """
    m_arr = m.mat
    n = m.order
    bp = initial_feasible_point(m, kappa)
    d_mat = np.diag(bp.d)

    def matrix_barrier(dm):
        facs = (_chol_pd(m_arr - dm), _chol_pd(kappa * dm - m_arr),
                _chol_pd(dm))
        if any(f is None for f in facs):
            return None
        return sum(2.0 * np.sum(np.log(np.diag(f))) for f in facs)

    val = matrix_barrier(d_mat)
    for _ in range(max_iter):
        lr = _chol_pd(m_arr - d_mat)
        ls = _chol_pd(kappa * d_mat - m_arr)
        ld = _chol_pd(d_mat)
        if lr is None or ls is None or ld is None:
            raise CenteringError("center iterate left the cone")
        x = _inv_from_chol(lr)
        y = _inv_from_chol(ls)
        z = _inv_from_chol(ld)
        grad = -x + kappa * y + z
        gnorm = np.linalg.norm(grad, ord="fro")
        if gnorm <= tol:
            return d_mat
        op = (np.kron(x, x) + kappa ** 2 * np.kron(y, y) + np.kron(z, z))
        delta = _solve_pd(op, grad.reshape(-1)).reshape(n, n)
        delta = 0.5 * (delta + delta.T)
        alpha = min(1.0, 0.9 * min(
            _max_step_cone(lr, delta),
            _max_step_cone(ls, -kappa * delta),
            _max_step_cone(ld, -delta)))
        for _ in range(40):
            cand = d_mat + alpha * delta
            v_new = matrix_barrier(cand)
            if v_new is not None and v_new >= val - 1e-12 * (1 + abs(val)):
                d_mat, val = cand, v_new
                break
            alpha *= 0.5
        else:
            raise CenteringError("backtracking failed", grad_norm=gnorm)
    raise CenteringError(f"no convergence in {max_iter} Newton iterations",
                         grad_norm=gnorm)


def state_from_center(m: SymMatrix, kappa: float, mode: str = MODE_FULL,
                      center_tol: float = 1e-11) -> CenterState:
    """Exact-center CenterState with X, Y, Z set to the true inverses."""
    if mode == MODE_FULL:
        d_mat = exact_center_full(m, kappa, tol=center_tol)
    else:
        bp = compute_center(m, kappa, initial_feasible_point(m, kappa),
                            tol=center_tol)
        d_mat = np.diag(bp.d)
    m_arr = m.mat
    x = _sym_pow(m_arr - d_mat, -1.0)
    y = _sym_pow(kappa * d_mat - m_arr, -1.0)
    z = _sym_pow(d_mat, -1.0)
    return CenterState(m=m_arr, kappa=float(kappa), D=d_mat,
                       X=x, Y=y, Z=z, mode=mode)


def delta_kappa(state: CenterState, beta: float) -> float:
    """Step size beta / Tr(D (kappa D - M)^{-1}) from the current state."""
    ls = _chol_pd(state.S)
    if ls is None:
        raise NotPositiveDefiniteError("S = kappa D - M is singular")
    s_inv = _inv_from_chol(ls)
    tr = float(np.sum(state.D * s_inv))
    return beta / tr


def shift_state(state: CenterState, dk: float) -> CenterState:
    """Move to kappa - dk, shifting S directly and Z by dk * Y.

    Keeps R, D, X, Y and the linear identity; raises StepTooLargeError when
    the shifted S leaves the PSD cone (callers halve beta).
    """
    kappa1 = state.kappa - dk
    s_shifted = kappa1 * state.D - state.m
    if _chol_pd(s_shifted) is None:
        raise StepTooLargeError(
            f"shift {dk:.3e} makes S indefinite at kappa={kappa1:.6g}")
    return CenterState(m=state.m, kappa=kappa1, D=state.D.copy(),
                       X=state.X.copy(), Y=state.Y.copy(),
                       Z=state.Z + dk * state.Y, mode=state.mode)


def nt_scalings(state: CenterState) -> NTScalings:
    return NTScalings(U=_geometric_mean(state.R, state.X),
                      V=_geometric_mean(state.S, state.Y),
                      W=_geometric_mean(state.D, state.Z))


def nt_step(state: CenterState, kappa1: float) -> CenterState:
    """One Newton step with Nesterov-Todd scalings toward the kappa1 center.

    Solves the coupled system for the D increment (with Delta R = -Delta D,
    Delta S = kappa1 Delta D, Delta X = Delta Z + kappa1 Delta Y), projected
    onto diagonal coordinates in diagonal-restricted mode.
    """
    if abs(kappa1 - state.kappa) > 1e-9 * max(1.0, abs(state.kappa)):
        raise ValueError("state must already be feasible at kappa1; "
                         "apply shift_state first")
    n = state.D.shape[0]
    scal = nt_scalings(state)
    ui = _sym_pow(scal.U, -1.0)
    vi = _sym_pow(scal.V, -1.0)
    wi = _sym_pow(scal.W, -1.0)
    z_rhs = _sym_pow(state.D, -1.0) - state.Z
    y_rhs = _sym_pow(state.S, -1.0) - state.Y
    x_rhs = _sym_pow(state.R, -1.0) - state.X
    rhs = z_rhs + kappa1 * y_rhs - x_rhs

    if state.mode == MODE_DIAG:
        coeff = ui ** 2 + wi ** 2 + kappa1 ** 2 * vi ** 2
        delta_d = np.diag(_solve_pd(coeff, np.diag(rhs)))
    else:
        op = (np.kron(ui, ui) + np.kron(wi, wi)
              + kappa1 ** 2 * np.kron(vi, vi))
        delta_d = _solve_pd(op, rhs.reshape(-1)).reshape(n, n)
        delta_d = 0.5 * (delta_d + delta_d.T)

    delta_z = z_rhs - wi @ delta_d @ wi
    delta_y = y_rhs - kappa1 * (vi @ delta_d @ vi)
    delta_x = delta_z + kappa1 * delta_y

    new = CenterState(m=state.m, kappa=kappa1, D=state.D + delta_d,
                      X=state.X + delta_x, Y=state.Y + delta_y,
                      Z=state.Z + delta_z, mode=state.mode)
    if _chol_pd(new.R) is None or _chol_pd(new.S) is None or \
            _chol_pd(new.D) is None:
        raise StepTooLargeError(
            "NT step left the cone; proximity exceeded the step's basin")
    return new


def _potential(m_arr, kappa, d):
    problem = _ShiftedBarrier(m_arr, kappa, shift=0.0)
    factors = problem.factors(d)
    if factors is None:
        return None
    return problem.value(d, factors)


def solve_right_pr(m: SymMatrix, config: PRConfig | None = None,
                   mode: str = "approximate") -> tuple[DiagScaling, SolveReport]:
    """Right preconditioner for M = A^T A by potential reduction.

    mode='exact' re-centers fully after each kappa decrease; 'approximate'
    performs exactly one NT Newton step. Starts at kappa = 1.01 kappa(M)
    from the uniform interior point; terminates on three consecutive outer
    steps with relative progress below kappa_tol.
    """
    if mode not in ("exact", "approximate"):
        raise ValueError("mode must be 'exact' or 'approximate'")
    config = config or PRConfig()
    t0 = time.perf_counter()
    m_arr = m.mat
    w = scipy.linalg.eigvalsh(m_arr)
    if w[0] <= 0:
        raise NotPositiveDefiniteError("input must be positive definite")
    kappa_m = float(w[-1] / w[0])
    kappa = kappa_m * 1.01
    center_tol = 1e-9 * max(1.0, float(np.abs(np.diag(m_arr)).max()))

    bp = compute_center(m, kappa, initial_feasible_point(m, kappa),
                        tol=center_tol)
    d = bp.d

    def fresh_state(d_vec, kappa_val):
        d_mat = np.diag(d_vec)
        return CenterState(
            m=m_arr, kappa=kappa_val, D=d_mat,
            X=_sym_pow(m_arr - d_mat, -1.0),
            Y=_sym_pow(kappa_val * d_mat - m_arr, -1.0),
            Z=_sym_pow(d_mat, -1.0), mode=MODE_DIAG)
    beta = config.beta
    trajectory = [(kappa, _potential(m_arr, kappa, d), beta)]
    small_progress = 0
    failed_attempts = 0
    clean_steps = 0
    iterations = 0

    with serial_blas():
        while iterations < config.max_outer:
            iterations += 1
            ls = _chol_pd(kappa * np.diag(d) - m_arr)
            if ls is None:
                raise StagnationError("slack matrix lost definiteness",
                                      {"kappa": kappa})
            s_inv = _inv_from_chol(ls)
            dk = beta / float(np.sum(d * np.diag(s_inv)))
            if kappa - dk <= 1.0:
                dk = 0.5 * (kappa - 1.0)
                if dk <= 1e-15 * kappa:
                    break
            kappa_new = kappa - dk

            try:
                if mode == "exact":
                    start = BarrierPoint(m, kappa_new, d)
                    d_new = compute_center(m, kappa_new, start,
                                           tol=center_tol).d
                else:
                    state = nt_step(shift_state(fresh_state(d, kappa), dk),
                                    kappa_new)
                    d_new = np.diag(state.D).copy()
                    if np.any(d_new <= 0):
                        raise StepTooLargeError("diagonal left positivity")
            except (StepTooLargeError, CenteringError,
                    NotPositiveDefiniteError, ValueError):
                beta *= 0.5
                clean_steps = 0
                failed_attempts += 1
                if beta < 1e-12 or failed_attempts >= 50:
                    raise StagnationError(
                        "no strict progress for 50 attempts",
                        {"kappa": kappa, "beta": beta,
                         "failed_attempts": failed_attempts})
                continue

            failed_attempts = 0
            kappa, d = kappa_new, d_new
            trajectory.append((kappa, _potential(m_arr, kappa, d), beta))
            clean_steps += 1
            if clean_steps >= 5:
                beta = min(2 * beta, config.beta)
                clean_steps = 0
            if dk / kappa < config.kappa_tol:
                small_progress += 1
                if small_progress >= 3:
                    break
            else:
                small_progress = 0

    # the returned scaling never worsens the condition number
    def _scaled_kappa(vals):
        s = 1.0 / np.sqrt(vals)
        ws = scipy.linalg.eigvalsh(s[:, None] * m_arr * s[None, :])
        return float(ws[-1] / ws[0])

    kappa_after = _scaled_kappa(d)
    if kappa_after > kappa_m:
        d = np.ones(m.order)
        kappa_after = kappa_m
    report = SolveReport(
        matrix="", method=f"potential_reduction_{mode}",
        kappa_before=kappa_m, kappa_after=kappa_after,
        iterations=iterations,
        wall_time_seconds=time.perf_counter() - t0,
        extra={"kappa_terminal": kappa,
               "potential_trajectory": [
                   [k, p, b] for (k, p, b) in trajectory]})
    return DiagScaling(d, side=SIDE_RIGHT), report
