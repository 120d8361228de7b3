"""Diagonal-restricted barrier machinery for the scaling feasible region.

For a PD matrix M and a level kappa, the region of interest is
{d > 0 : M - D > 0, kappa D - M > 0} with D = diag(d). The log-det barrier
over this region has the analytic center as its unique maximizer; a phase-I
variant with uniformly shifted cones yields the feasibility margin that the
two-sided bisection consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import SymMatrix, serial_blas
from .matrixio import RectMatrix


class InfeasiblePointError(ValueError):
    """A point violates strict feasibility of the barrier cones."""


class CenteringError(RuntimeError):
    """Newton centering failed; carries the last gradient norm."""

    def __init__(self, message, grad_norm=None):
        super().__init__(message)
        self.grad_norm = grad_norm


@dataclass
class PhaseIConfig:
    """Tuning knobs for the feasibility-margin search."""

    outer_steps: int = 30
    newton_tol: float = 1e-10
    newton_cap: int = 80
    boundary_tol: float = 1e-7
    box_bound: float = 1e6  # upper box on d1 in the two-sided problem


@dataclass
class FeasibilityResult:
    """Max-margin outcome: s*, its witness, and a convergence flag.

    margin > tol means strictly feasible, margin < -tol infeasible, and
    |margin| <= tol is boundary (treated as feasible by callers). For the
    two-sided problem the witness is d2 and witness_left is d1.
    """

    margin: float
    witness: np.ndarray
    converged: bool
    witness_left: np.ndarray | None = None


def _chol_pd(a):
    """Cholesky factor or None when the matrix is not numerically PD."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _solve_pd(neg_h, g):
    """Solve the (nominally PD) Newton system, tolerating near-singularity.

    Steps are validated downstream by feasibility and value backtracking,
    so an inaccurate direction near a cone boundary is harmless.
    """
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(neg_h, g, assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError):
            return scipy.linalg.lstsq(neg_h, g)[0]


class BarrierPoint:
    """Strictly feasible point (d, kappa) with cached cone factors."""

    __slots__ = ("m", "kappa", "d", "chol_r", "chol_s")

    def __init__(self, m: SymMatrix, kappa: float, d):
        d = np.asarray(d, dtype=float)
        mm = m.mat
        if d.shape != (m.order,):
            raise ValueError("d has the wrong length")
        if np.any(d <= 0):
            raise InfeasiblePointError("d must be strictly positive")
        lr = _chol_pd(mm - np.diag(d))
        ls = _chol_pd(kappa * np.diag(d) - mm)
        if lr is None or ls is None:
            raise InfeasiblePointError(
                f"(d, kappa={kappa:.6g}) is not strictly feasible")
        self.m = m
        self.kappa = float(kappa)
        self.d = d
        self.chol_r = lr
        self.chol_s = ls


def _logdet_from_chol(lower):
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def barrier_value(m: SymMatrix, p: BarrierPoint) -> float:
    """log det(M-D) + log det(kappa D - M) + log det D."""
    return (_logdet_from_chol(p.chol_r) + _logdet_from_chol(p.chol_s)
            + float(np.sum(np.log(p.d))))


def _inv_from_chol(lower):
    inv, info = scipy.linalg.lapack.dpotri(lower, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError("dpotri failed on the Cholesky factor")
    return inv + np.tril(inv, -1).T


def barrier_gradient(m: SymMatrix, p: BarrierPoint) -> np.ndarray:
    """Per-coordinate derivative -[(M-D)^{-1}]_ii + kappa[(kD-M)^{-1}]_ii + 1/d_i."""
    x = _inv_from_chol(p.chol_r)
    y = _inv_from_chol(p.chol_s)
    return -np.diag(x) + p.kappa * np.diag(y) + 1.0 / p.d


def barrier_hessian(m: SymMatrix, p: BarrierPoint) -> SymMatrix:
    """Hessian over the diagonal coordinates; negative definite."""
    x = _inv_from_chol(p.chol_r)
    y = _inv_from_chol(p.chol_s)
    h = -(x * x) - (p.kappa ** 2) * (y * y) - np.diag(1.0 / p.d ** 2)
    return SymMatrix(h)


def _max_step_cone(lower, delta_mat):
    """Largest alpha with cone - alpha*delta_mat still PSD (inf if unbounded)."""
    z = scipy.linalg.solve_triangular(lower, delta_mat, lower=True)
    t = scipy.linalg.solve_triangular(lower, z.T, lower=True).T
    w = scipy.linalg.eigvalsh(0.5 * (t + t.T))
    wmax = w[-1]
    if wmax <= 0:
        return np.inf
    return 1.0 / wmax


class _ShiftedBarrier:
    """The one-sided barrier with all three cones shifted by s.

    Cones: (M - sI) - D, kappa D - (M + sI), and d - s. With s = 0 this is
    the plain barrier.
    """

    def __init__(self, m_arr, kappa, shift=0.0):
        n = m_arr.shape[0]
        self.kappa = kappa
        self.shift = shift
        self.m1 = m_arr - shift * np.eye(n)
        self.m2 = m_arr + shift * np.eye(n)
        self.n = n

    def factors(self, d):
        lr = _chol_pd(self.m1 - np.diag(d))
        ls = _chol_pd(self.kappa * np.diag(d) - self.m2)
        if lr is None or ls is None or np.any(d <= self.shift):
            return None
        return lr, ls

    def value(self, d, factors):
        lr, ls = factors
        return (_logdet_from_chol(lr) + _logdet_from_chol(ls)
                + float(np.sum(np.log(d - self.shift))))

    def grad_hess(self, d, factors):
        lr, ls = factors
        x = _inv_from_chol(lr)
        y = _inv_from_chol(ls)
        slack = d - self.shift
        g = -np.diag(x) + self.kappa * np.diag(y) + 1.0 / slack
        h = -(x * x) - (self.kappa ** 2) * (y * y) - np.diag(1.0 / slack ** 2)
        return g, h

    def max_step(self, d, delta, factors):
        lr, ls = factors
        # R(alpha) = R - alpha diag(delta); S(alpha) = S + alpha kappa diag(delta)
        alpha = _max_step_cone(lr, np.diag(delta))
        alpha = min(alpha, _max_step_cone(ls, np.diag(-self.kappa * delta)))
        neg = delta < 0
        if np.any(neg):
            alpha = min(alpha, np.min((d[neg] - self.shift) / -delta[neg]))
        return alpha


def _newton_maximize(problem, d0, tol, max_iter, dec_tol=None):
    """Damped Newton ascent of a strictly concave barrier.

    Full step when it keeps >= 10% distance from every cone boundary,
    otherwise backtracking by halving (at most 40 halvings). Stops on the
    gradient's infinity norm, or early on the affine-invariant Newton
    decrement when dec_tol is set. Returns (d, grad_inf_norm, converged).
    """
    d = np.asarray(d0, dtype=float).copy()
    factors = problem.factors(d)
    if factors is None:
        raise InfeasiblePointError("start is not strictly feasible")
    val = problem.value(d, factors)
    gnorm = np.inf
    for _ in range(max_iter):
        g, h = problem.grad_hess(d, factors)
        gnorm = float(np.abs(g).max())
        if gnorm <= tol:
            return d, gnorm, True
        delta = _solve_pd(-h, g)
        if dec_tol is not None and float(g @ delta) <= dec_tol * (1 + abs(val)):
            return d, gnorm, True
        # try the full step before paying for the exact boundary computation
        alpha = 1.0
        accepted = False
        for attempt in range(40):
            d_new = d + alpha * delta
            f_new = problem.factors(d_new)
            if f_new is not None:
                v_new = problem.value(d_new, f_new)
                if v_new >= val - 1e-10 * (1.0 + abs(val)):
                    d, factors, val = d_new, f_new, v_new
                    accepted = True
                    break
            if attempt == 0:
                bound = 0.9 * problem.max_step(d, delta, factors)
                alpha = bound if bound < alpha else 0.5 * alpha
            else:
                alpha *= 0.5
        if not accepted:
            return d, gnorm, False
    return d, gnorm, False


def compute_center(m: SymMatrix, kappa: float, start: BarrierPoint,
                   tol: float = 1e-8, max_iter: int = 200) -> BarrierPoint:
    """Analytic center of the region at level kappa from a feasible start."""
    problem = _ShiftedBarrier(m.mat, kappa, shift=0.0)
    d, gnorm, ok = _newton_maximize(problem, start.d, tol, max_iter)
    if not ok:
        raise CenteringError(
            f"centering did not reach tol={tol:.1e} "
            f"(last gradient norm {gnorm:.3e})", grad_norm=gnorm)
    return BarrierPoint(m, kappa, d)


def initial_feasible_point(m: SymMatrix, kappa: float) -> BarrierPoint:
    """Uniform strictly feasible start d = c * ones, c = sqrt(lam1*lamn/kappa)."""
    w = scipy.linalg.eigvalsh(m.mat)
    lamn, lam1 = float(w[0]), float(w[-1])
    if lamn <= 0:
        raise InfeasiblePointError("matrix must be positive definite")
    if kappa <= lam1 / lamn:
        raise InfeasiblePointError(
            f"kappa={kappa:.6g} is not above the condition number "
            f"{lam1 / lamn:.6g}")
    c = np.sqrt(lam1 * lamn / kappa)
    return BarrierPoint(m, kappa, np.full(m.order, c))


def _one_sided_slack(m_arr, kappa, d):
    dd = np.diag(d)
    s1 = scipy.linalg.eigvalsh(m_arr - dd)[0]
    s2 = scipy.linalg.eigvalsh(kappa * dd - m_arr)[0]
    return float(min(s1, s2, d.min()))


def _margin_ascent(make_problem, slack_of, d0, config, stop_above=None):
    """Max-margin search by repeated centering at the current best slack.

    Centering the s-shifted region from a witness with slack > s lands
    roughly halfway between s and the max margin, so iterating the achieved
    slack converges geometrically. stop_above ends the climb early once the
    margin's sign is unambiguous (all a bisection caller needs).
    """
    w = np.asarray(d0, dtype=float).copy()
    sig = slack_of(w)
    converged = False
    with serial_blas():
        for _ in range(config.outer_steps):
            if stop_above is not None and sig > stop_above:
                converged = True
                break
            pad = 1e-9 * max(1.0, abs(sig))
            s_run = sig - pad
            problem = make_problem(s_run)
            try:
                cand, _, _ = _newton_maximize(
                    problem, w, config.newton_tol, config.newton_cap,
                    dec_tol=1e-12)
            except InfeasiblePointError:
                break
            sig_new = slack_of(cand)
            if sig_new > sig:
                w, climb = cand, sig_new - sig
                sig = sig_new
                if climb <= 10 * pad:
                    converged = True
                    break
            else:
                converged = True
                break
    return sig, w, converged


def feasibility_margin(m: SymMatrix, kappa: float,
                       config: PhaseIConfig | None = None) -> FeasibilityResult:
    """Largest uniform slack s with M-D >= sI, kD-M >= sI, D >= sI feasible.

    The sign of the margin decides SDP feasibility at level kappa; the
    witness attains it (up to the search resolution).
    """
    config = config or PhaseIConfig()
    m_arr = m.mat
    w = scipy.linalg.eigvalsh(m_arr)
    lamn, lam1 = float(w[0]), float(w[-1])
    if lamn <= 0:
        raise InfeasiblePointError("matrix must be positive definite")
    c = np.sqrt(lam1 * lamn / kappa) if kappa > 0 else np.sqrt(lam1 * lamn)
    d0 = np.full(m.order, c)

    def make(s):
        return _ShiftedBarrier(m_arr, kappa, shift=s)

    margin, witness, converged = _margin_ascent(
        make, lambda d: _one_sided_slack(m_arr, kappa, d), d0, config)
    return FeasibilityResult(margin=margin, witness=witness,
                             converged=converged)


class _TwoSidedBarrier:
    """Shifted barrier over (d1, d2) for the two-sided feasibility cones.

    Cones at shift s: A^T D1 A - D2 - sI, kappa D2 - A^T D1 A - sI, and
    d1 - (1 + s). The upper box d1 <= B and positivity d2 > 0 are kept
    unshifted; the box bounds the otherwise scale-unbounded region.
    """

    def __init__(self, a_arr, kappa, shift, box_bound):
        self.a = a_arr
        self.kappa = kappa
        self.shift = shift
        self.box = box_bound
        self.m_rows, self.n = a_arr.shape

    def split(self, v):
        return v[:self.m_rows], v[self.m_rows:]

    def factors(self, v):
        d1, d2 = self.split(v)
        if np.any(d1 <= 1.0 + self.shift) or np.any(d1 >= self.box) or \
                np.any(d2 <= 0):
            return None
        g = self.a.T @ (d1[:, None] * self.a)
        g = 0.5 * (g + g.T)
        eye = np.eye(self.n)
        l1 = _chol_pd(g - np.diag(d2) - self.shift * eye)
        l2 = _chol_pd(self.kappa * np.diag(d2) - g - self.shift * eye)
        if l1 is None or l2 is None:
            return None
        return l1, l2

    def value(self, v, factors):
        d1, d2 = self.split(v)
        l1, l2 = factors
        return (_logdet_from_chol(l1) + _logdet_from_chol(l2)
                + float(np.sum(np.log(d1 - 1.0 - self.shift)))
                + float(np.sum(np.log(self.box - d1)))
                + float(np.sum(np.log(d2))))

    def grad_hess(self, v, factors):
        d1, d2 = self.split(v)
        l1, l2 = factors
        p = _inv_from_chol(l1)
        q = _inv_from_chol(l2)
        ap = self.a @ p
        aq = self.a @ q
        row_p = np.einsum("ij,ij->i", ap, self.a)
        row_q = np.einsum("ij,ij->i", aq, self.a)
        lo = d1 - 1.0 - self.shift
        hi = self.box - d1
        g1 = row_p - row_q + 1.0 / lo - 1.0 / hi
        g2 = -np.diag(p) + self.kappa * np.diag(q) + 1.0 / d2
        apa = ap @ self.a.T
        aqa = aq @ self.a.T
        h11 = -(apa * apa) - (aqa * aqa) \
            - np.diag(1.0 / lo ** 2 + 1.0 / hi ** 2)
        h22 = -(p * p) - (self.kappa ** 2) * (q * q) - np.diag(1.0 / d2 ** 2)
        h12 = ap ** 2 + self.kappa * (aq ** 2)
        g = np.concatenate([g1, g2])
        h = np.block([[h11, h12], [h12.T, h22]])
        return g, 0.5 * (h + h.T)

    def max_step(self, v, delta, factors):
        d1, d2 = self.split(v)
        e1, e2 = self.split(delta)
        l1, l2 = factors
        # cone 1 changes by alpha*(A^T diag(e1) A - diag(e2))
        dg = self.a.T @ (e1[:, None] * self.a)
        dg = 0.5 * (dg + dg.T)
        alpha = _max_step_cone(l1, -(dg - np.diag(e2)))
        alpha = min(alpha, _max_step_cone(
            l2, -(self.kappa * np.diag(e2) - dg)))
        lo = d1 - 1.0 - self.shift
        neg = e1 < 0
        if np.any(neg):
            alpha = min(alpha, np.min(lo[neg] / -e1[neg]))
        pos = e1 > 0
        if np.any(pos):
            alpha = min(alpha, np.min((self.box - d1)[pos] / e1[pos]))
        neg2 = e2 < 0
        if np.any(neg2):
            alpha = min(alpha, np.min(d2[neg2] / -e2[neg2]))
        return alpha


def _two_sided_slack(a_arr, kappa, v):
    m = a_arr.shape[0]
    d1, d2 = v[:m], v[m:]
    g = a_arr.T @ (d1[:, None] * a_arr)
    g = 0.5 * (g + g.T)
    s1 = scipy.linalg.eigvalsh(g - np.diag(d2))[0]
    s2 = scipy.linalg.eigvalsh(kappa * np.diag(d2) - g)[0]
    return float(min(s1, s2, d1.min() - 1.0))


def two_sided_feasibility(a: RectMatrix, kappa: float,
                          config: PhaseIConfig | None = None
                          ) -> FeasibilityResult:
    """Phase-I max margin for A^T D1 A >= D2, kD2 >= A^T D1 A, D1 >= I."""
    config = config or PhaseIConfig()
    x = a.mat
    if x.shape[0] < x.shape[1]:
        x = x.T
    m_rows, n = x.shape
    gram = x.T @ x
    w = scipy.linalg.eigvalsh(0.5 * (gram + gram.T))
    lamn, lam1 = float(w[0]), float(w[-1])
    if lamn <= 1e-12 * max(lam1, 0.0):
        raise ValueError("matrix must have full rank")
    d1 = np.full(m_rows, 2.0)
    c = 2.0 * (np.sqrt(lam1 * lamn / kappa) if kappa > 0
               else np.sqrt(lam1 * lamn))
    v0 = np.concatenate([d1, np.full(n, c)])

    def make(s):
        return _TwoSidedBarrier(x, kappa, s, config.box_bound)

    # bisection needs only the margin's sign; stop once it is unambiguous
    stop_above = max(100 * config.boundary_tol, 1e-3 * lamn)
    margin, witness, converged = _margin_ascent(
        make, lambda v: _two_sided_slack(x, kappa, v), v0, config,
        stop_above=stop_above)
    return FeasibilityResult(margin=margin, witness=witness[m_rows:],
                             converged=converged,
                             witness_left=witness[:m_rows])
