"""Recovering unnormalized statistics from normalized ones.

``fit`` factors the measured normalized covariance as

    Diag(d) Rbar Diag(d)  ~  beta * S + Diag(a) Gbar Diag(a)

in Frobenius norm, where ``S`` is the clutter matrix of the transmitted
sequence and ``Gbar`` the normalized interference covariance. The problem is
invariant under ``(d, a, beta) -> (c d, c a, c^2 beta)``, so the scale is
pinned by ``||d||^2 = N``; everything downstream (the filter, ``mu``) is
invariant to that scale.

``MomentEstimate`` averages ``d d^H`` over the fits seen so far and
``build_Q`` turns it into the expected covariance ``E{d d^H} * Rbar``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConsistencyError, DomainError
from .onebit import NormalizedCovariance

FLOOR = 1e-8
ARMIJO_C = 1e-4
MOMENT_LOADING = 1e-6
Q_AGREEMENT = 1e-10


@dataclass
class FitResult:
    d: np.ndarray
    a: np.ndarray
    beta: float
    residual: float
    iterations: int
    converged: bool = False
    degenerate: bool = False
    history: list = field(default_factory=list)

    def reconstruction(self, Rbar) -> np.ndarray:
        return np.outer(self.d, self.d) * _mat(Rbar)

    def relative_residual(self, Rbar) -> float:
        """Residual Frobenius norm over the norm of the reconstruction."""
        return float(np.sqrt(self.residual) / np.linalg.norm(self.reconstruction(Rbar)))


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, NormalizedCovariance) else np.asarray(x)


def objective(d, a, beta, Rbar, Gbar, S) -> float:
    """``||Diag(d) Rbar Diag(d) - beta S - Diag(a) Gbar Diag(a)||_F^2``."""
    E = np.outer(d, d) * Rbar - beta * S - np.outer(a, a) * Gbar
    return float(np.vdot(E, E).real)


def _residual(d, a, beta, Rbar, Gbar, S):
    return np.outer(d, d) * Rbar - beta * S - np.outer(a, a) * Gbar


def grad_d(d, a, beta, Rbar, Gbar, S) -> np.ndarray:
    E = _residual(d, a, beta, Rbar, Gbar, S)
    return 4.0 * (E.conj() * Rbar).real @ d


def grad_a(d, a, beta, Rbar, Gbar, S) -> np.ndarray:
    E = _residual(d, a, beta, Rbar, Gbar, S)
    return -4.0 * (E.conj() * Gbar).real @ a


def _project_box(x, floor):
    return np.maximum(x, floor)


def _project_d(x, floor, norm2):
    x = np.maximum(x, floor)
    x = x * np.sqrt(norm2 / np.dot(x, x))
    return np.maximum(x, floor)


def _pg_block(x, value, grad, project, steps: int, step0: float):
    """Projected gradient with Barzilai-Borwein trial steps and Armijo
    backtracking. Returns the new point, its value and the last step."""
    fx = value(x)
    g = grad(x)
    t = step0
    x_prev = g_prev = None
    for _ in range(steps):
        if x_prev is not None:
            dx, dg = x - x_prev, g - g_prev
            curv = np.dot(dx, dg)
            if curv > 0:
                t = np.dot(dx, dx) / curv
        accepted = False
        for _ in range(60):
            xn = project(x - t * g)
            fn = value(xn)
            if fn <= fx + ARMIJO_C * np.dot(g, xn - x):
                accepted = True
                break
            t *= 0.5
        if not accepted or fn >= fx:
            break
        x_prev, g_prev = x, g
        x, fx = xn, fn
        g = grad(x)
    return x, fx, t


def closed_form_beta(d, a, Rbar, Gbar, S, floor: float = FLOOR) -> float:
    """Nonnegative least-squares ``beta`` for fixed ``d`` and ``a``."""
    C = np.outer(d, d) * Rbar - np.outer(a, a) * Gbar
    ss = np.vdot(S, S).real
    if ss == 0:
        return floor
    return max(floor, float(np.vdot(S, C).real / ss))


def _gauss_newton(d, a, beta, Rbar, Gbar, S):
    """Gradient ``J^T r`` and Gauss-Newton matrix ``J^T J`` of the residual
    over the stacked parameters ``(d, a, beta)``."""
    E = _residual(d, a, beta, Rbar, Gbar, S)
    n = d.shape[0]
    AR = np.abs(Rbar) ** 2
    AG = np.abs(Gbar) ** 2
    P = np.real(Rbar.conj() * Gbar)
    RS = np.real(Rbar.conj() * S)
    GS = np.real(Gbar.conj() * S)
    H = np.empty((2 * n + 1, 2 * n + 1))
    H[:n, :n] = 2 * np.outer(d, d) * AR + 2 * np.diag(AR @ d**2)
    H[n:2 * n, n:2 * n] = 2 * np.outer(a, a) * AG + 2 * np.diag(AG @ a**2)
    Hda = -2 * np.outer(a, d) * P - 2 * np.diag(P @ (a * d))
    H[:n, n:2 * n] = Hda
    H[n:2 * n, :n] = Hda.T
    H[:n, -1] = H[-1, :n] = -2 * RS @ d
    H[n:2 * n, -1] = H[-1, n:2 * n] = 2 * GS @ a
    H[-1, -1] = np.vdot(S, S).real
    g = np.concatenate([
        2 * np.real(Rbar.conj() * E) @ d,
        -2 * np.real(Gbar.conj() * E) @ a,
        [-np.vdot(S, E).real],
    ])
    return g, H


def _pin(d, a, beta, n):
    c = np.sqrt(n / np.dot(d, d))
    return d * c, a * c, beta * c * c


def _lm(d, a, beta, Rbar, Gbar, S, *, tol, max_iter, floor):
    """Projected Levenberg-Marquardt on all parameters at once.

    Steps are clipped to the floor and the gauge is re-pinned to
    ``||d||^2 = N`` after each trial; a trial is accepted only if it lowers
    the (pinned) objective.
    """
    n = d.shape[0]
    h = objective(d, a, beta, Rbar, Gbar, S)
    history = [h]
    damp = 1e-3
    converged = False
    it = 0
    ref = np.linalg.norm(np.outer(d, d) * Rbar) ** 2
    for it in range(1, max_iter + 1):
        g, H = _gauss_newton(d, a, beta, Rbar, Gbar, S)
        dg = np.diag(H).copy() + 1e-12 * max(np.max(np.diag(H)), 1e-300)
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(H + damp * np.diag(dg), -g)
            except np.linalg.LinAlgError:
                damp *= 10
                continue
            dn = np.maximum(d + step[:n], floor)
            an = np.maximum(a + step[n:2 * n], floor)
            bn = max(beta + step[-1], floor)
            dn, an, bn = _pin(dn, an, bn, n)
            dn, an, bn = np.maximum(dn, floor), np.maximum(an, floor), max(bn, floor)
            hn = objective(dn, an, bn, Rbar, Gbar, S)
            if hn < h:
                accepted = True
                break
            damp *= 4.0
        if not accepted:
            converged = True
            break
        rel = (h - hn) / h
        d, a, beta, h = dn, an, bn, hn
        history.append(h)
        damp = max(damp / 3.0, 1e-12)
        if h <= 1e-28 * ref or rel <= tol:
            converged = True
            break
    return d, a, beta, h, it, converged, history


def _bcd(d, a, beta, Rbar, Gbar, S, *, tol, max_iter, floor, block_steps):
    """Cyclic d / beta / a blocks; d and a by projected gradient."""
    n = d.shape[0]
    h = objective(d, a, beta, Rbar, Gbar, S)
    history = [h]
    step_d = step_a = 1.0 / max(np.linalg.norm(Rbar) ** 2, 1.0)
    converged = False
    sweeps = 0
    ref = np.linalg.norm(np.outer(d, d) * Rbar) ** 2
    for sweeps in range(1, max_iter + 1):
        h_start = h
        d, h, step_d = _pg_block(
            d,
            lambda x: objective(x, a, beta, Rbar, Gbar, S),
            lambda x: grad_d(x, a, beta, Rbar, Gbar, S),
            lambda x: _project_d(x, floor, n),
            block_steps, step_d)
        beta_new = closed_form_beta(d, a, Rbar, Gbar, S, floor)
        h_new = objective(d, a, beta_new, Rbar, Gbar, S)
        if h_new <= h:
            beta, h = beta_new, h_new
        a, h, step_a = _pg_block(
            a,
            lambda x: objective(d, x, beta, Rbar, Gbar, S),
            lambda x: grad_a(d, x, beta, Rbar, Gbar, S),
            lambda x: _project_box(x, floor),
            block_steps, step_a)
        history.append(h)
        if h <= 1e-28 * ref or h_start - h <= tol * h_start:
            converged = True
            break
    return d, a, beta, h, sweeps, converged, history


def fit(Rbar, Gammabar, S, init=None, *, method: str = "lm", tol: float = 1e-8,
        max_sweeps: int = 500, starts=None, block_steps: int = 10,
        floor: float = FLOOR) -> FitResult:
    """Fit ``(d, a, beta)``; see the module docstring.

    ``method="lm"`` (default) runs a projected Levenberg-Marquardt on all
    parameters; ``method="bcd"`` cycles d / beta / a blocks, the d and a
    blocks by projected gradient with Armijo backtracking and ``beta`` in
    closed form. Either way the objective never increases between
    recorded iterations and iteration stops on a relative decrease below
    ``tol`` or after ``max_sweeps`` iterations.

    ``init`` is a ``(d, a, beta)`` triple or a previous :class:`FitResult`
    (warm start). Without it, short runs from a grid of clutter shares
    ``starts`` (fractions of the channel power assigned to clutter) are
    compared and the best one is continued; the problem is nonconvex and a
    single start often stalls at a poor stationary point.
    """
    Rbar = _mat(Rbar).astype(complex)
    Gbar = _mat(Gammabar).astype(complex)
    S = np.asarray(S, dtype=complex)
    n = Rbar.shape[0]
    if Gbar.shape != (n, n) or S.shape != (n, n):
        raise DomainError("Rbar, Gammabar and S must share the same shape")
    if method not in ("lm", "bcd"):
        raise DomainError(f"unknown fit method {method!r}")
    degenerate = bool(np.allclose(S, 0) and np.allclose(Rbar, Gbar))

    def run(d, a, beta, iters):
        d = np.asarray(d, dtype=float)
        a = np.asarray(a, dtype=float)
        d, a, beta = _pin(np.maximum(d, floor), np.maximum(a, floor), max(beta, floor), n)
        if method == "lm":
            return _lm(d, a, beta, Rbar, Gbar, S, tol=tol, max_iter=iters, floor=floor)
        return _bcd(d, a, beta, Rbar, Gbar, S, tol=tol, max_iter=iters, floor=floor,
                    block_steps=block_steps)

    if isinstance(init, FitResult):
        init = (init.d, init.a, init.beta)
    if init is not None:
        out = run(*init, max_sweeps)
    else:
        if starts is None:
            starts = DEFAULT_STARTS
        trials = [run(*share_init(S, rho), STARTUP_ITERS) for rho in starts]
        best = min(trials, key=lambda r: r[3])
        out = run(best[0], best[1], best[2], max_sweeps)
        out = out[:4] + (out[4] + STARTUP_ITERS,) + out[5:6] + (best[6] + out[6][1:],)
    d, a, beta, h, iters, converged, history = out
    return FitResult(d=d, a=a, beta=float(beta), residual=float(h), iterations=iters,
                     converged=converged, degenerate=degenerate, history=history)


DEFAULT_STARTS = (0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98)
STARTUP_ITERS = 8


def share_init(S, rho: float):
    """Unit channel power with a fraction ``rho`` of it attributed to clutter."""
    n = S.shape[0]
    sdiag = float(np.mean(np.asarray(S).diagonal().real))
    if sdiag <= 0:
        return np.ones(n), np.ones(n), FLOOR
    return np.ones(n), np.full(n, np.sqrt(1.0 - rho)), rho / sdiag


@dataclass(frozen=True)
class MomentEstimate:
    """Running mean of ``d d^H``; ``second_moment`` adds a small diagonal load.

    Immutable: :func:`update_moment` returns a new estimate.
    """

    total: np.ndarray
    count: int = 0

    @classmethod
    def empty(cls, N: int) -> "MomentEstimate":
        return cls(np.zeros((N, N), dtype=complex), 0)

    @property
    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise DomainError("moment estimate holds no samples")
        return self.total / self.count

    @property
    def loading(self) -> float:
        return MOMENT_LOADING * float(np.mean(self.mean.diagonal().real))

    @property
    def second_moment(self) -> np.ndarray:
        m = self.mean
        return m + self.loading * np.eye(m.shape[0])


def update_moment(est: MomentEstimate, d) -> MomentEstimate:
    d = np.asarray(d)
    if d.shape != (est.total.shape[0],):
        raise DomainError("sample length does not match the estimate")
    return MomentEstimate(est.total + np.outer(d, d.conj()), est.count + 1)


def q_from_evd(moment, Rbar) -> np.ndarray:
    """``sum_k nu_k Diag(u_k) Rbar Diag(u_k)^H`` over the eigenpairs of ``moment``."""
    nu, U = np.linalg.eigh(moment)
    Q = np.zeros_like(Rbar, dtype=complex)
    for k in range(nu.shape[0]):
        u = U[:, k]
        Q += nu[k] * (u[:, None] * Rbar * u.conj()[None, :])
    return Q


def build_Q(est, Rbar, check: bool = True) -> np.ndarray:
    """Expected covariance ``E{d d^H} * Rbar`` (Hadamard product).

    With ``check`` the eigen-sum form is computed too; a relative Frobenius
    disagreement above ``1e-10`` raises :class:`ConsistencyError`.
    """
    M = est.second_moment if isinstance(est, MomentEstimate) else np.asarray(est)
    Rbar = _mat(Rbar)
    Q = M * Rbar
    if check:
        Q_evd = q_from_evd(M, Rbar)
        err = np.linalg.norm(Q - Q_evd) / max(np.linalg.norm(Q), 1e-300)
        if err > Q_AGREEMENT:
            raise ConsistencyError(f"Q forms disagree (relative error {err:.3e})")
    return 0.5 * (Q + Q.conj().T)
