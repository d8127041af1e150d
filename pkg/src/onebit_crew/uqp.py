"""Transmit-sequence optimization over unimodular vectors.

For a fixed receive filter ``w`` the MSE divided by the clutter power is the
ratio ``f(s) = (s^H X s + mu) / |w^H s|^2`` with ``X = clutter_matrix(w)``.
It is decreased by Dinkelbach steps: freeze ``f* = f(s)`` and push
``s^H (X - f* w w^H) s`` down, which is a unimodular quadratic program
handled by phase-projection power iterations on the shifted matrix
``lam * I - (X - f* w w^H)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateFilterError, DomainError
from .onebit import NormalizedCovariance
from .radar import clutter_matrix

ZERO_MODULUS = 1e-14
SHIFT_FACTOR = 1.01


@dataclass(frozen=True)
class ShiftedMatrix:
    T: np.ndarray
    T_tilde: np.ndarray
    lam: float


@dataclass
class FractionalState:
    """Result of :func:`dinkelbach_s_step`.

    ``history`` holds ``f(s)`` after every accepted outer step (the first
    entry is ``f(s0)``); ``g_values`` the surrogate ``a(s) - f* b(s)`` at
    each accepted step, which is never positive beyond round-off.
    """

    s: np.ndarray
    f: float
    mu: float
    outer: int = 0
    inner: int = 0
    history: list = field(default_factory=list)
    g_values: list = field(default_factory=list)


def mu_estimate(w, Gamma_bar, a, beta: float) -> float:
    """``w^H Diag(a) Gamma_bar Diag(a) w / beta``, the s-independent MSE term."""
    G = Gamma_bar.matrix if isinstance(Gamma_bar, NormalizedCovariance) else np.asarray(Gamma_bar)
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0) or beta <= 0:
        raise DomainError("scales and beta must be positive")
    aw = a * np.asarray(w, dtype=complex)
    return float(np.vdot(aw, G @ aw).real / beta)


def shift_for(T) -> float:
    """A real ``lam`` strictly above the largest eigenvalue of ``T``."""
    top = float(np.linalg.eigvalsh(T)[-1])
    lam = top + (SHIFT_FACTOR - 1.0) * abs(top)
    if lam <= top:
        lam = top + max(1e-12 * np.linalg.norm(T), 1e-300)
    return lam


def build_T(chi, W, f_star: float, lam: float | None = None) -> ShiftedMatrix:
    """``T = chi - f_star * W`` and the positive-definite ``lam * I - T``.

    ``lam`` defaults to ``1.01 * lambda_max(T)`` (nudged upward when that
    eigenvalue is not positive). A caller-supplied ``lam`` must exceed
    ``lambda_max(T)``.
    """
    chi = np.asarray(chi, dtype=complex)
    T = chi - f_star * np.asarray(W, dtype=complex)
    if lam is None:
        lam = shift_for(T)
    T_tilde = lam * np.eye(T.shape[0]) - T
    return ShiftedMatrix(T, T_tilde, float(lam))


def power_step(T_tilde, s) -> np.ndarray:
    """One phase-projection step ``exp(1j * arg(T_tilde @ s))``.

    Entries of ``T_tilde @ s`` with modulus below ``1e-14`` keep the phase
    of ``s``.
    """
    M = T_tilde.T_tilde if isinstance(T_tilde, ShiftedMatrix) else T_tilde
    s = np.asarray(s, dtype=complex)
    t = M @ s
    mag = np.abs(t)
    small = mag < ZERO_MODULUS
    out = np.empty_like(s)
    out[~small] = t[~small] / mag[~small]
    out[small] = s[small] / np.abs(s[small])
    return out


def dinkelbach_s_step(w, s0, mu: float, *, tol_outer: float = 1e-6, cap_outer: int = 100,
                      tol_inner: float = 1e-8, cap_inner: int = 1000,
                      chi=None) -> FractionalState:
    """Decrease ``f(s) = (s^H chi s + mu) / |w^H s|^2`` over unimodular ``s``.

    Each outer step freezes ``f*``, builds ``T = chi - f* w w^H`` and runs
    power steps on ``lam * I - T`` until the quadratic form stops growing by
    more than ``tol_inner`` (relative). The outer loop stops once ``f``
    drops by less than ``tol_outer`` (relative). A step that would increase
    ``f`` through round-off is discarded, so ``history`` is nonincreasing.

    ``lam`` is fixed per call at ``1.01 * lambda_max(chi)``; since
    ``f* w w^H`` is PSD this upper-bounds ``lambda_max(T)`` for every
    ``f* >= 0``.
    """
    w = np.asarray(w, dtype=complex)
    s = np.asarray(s0, dtype=complex).copy()
    n = s.shape[0]
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    wn2 = float(np.vdot(w, w).real)
    if wn2 == 0:
        raise DegenerateFilterError("receive filter is zero")
    if chi is None:
        chi = clutter_matrix(w)
    b_floor = 1e-14 * wn2 * n

    def ratio(x):
        b = abs(np.vdot(w, x)) ** 2
        if b < b_floor:
            raise DegenerateFilterError("|w^H s|^2 is numerically zero")
        return (np.vdot(x, chi @ x).real + mu) / b, b

    lam_chi = float(np.linalg.eigvalsh(chi)[-1]) if n > 1 else 0.0
    lam = SHIFT_FACTOR * lam_chi if lam_chi > 0 else 1.0

    f, _ = ratio(s)
    state = FractionalState(s=s, f=f, mu=mu, history=[f])
    for outer in range(cap_outer):
        # T_tilde @ x = lam*x - chi@x + f* w (w^H x), applied without forming W
        def apply(x, f_star=f):
            return lam * x - chi @ x + f_star * w * np.vdot(w, x)

        cur = s
        tx = apply(cur)
        q = np.vdot(cur, tx).real
        steps = 0
        for steps in range(1, cap_inner + 1):
            mag = np.abs(tx)
            small = mag < ZERO_MODULUS
            nxt = np.where(small, cur, tx / np.where(small, 1.0, mag))
            tx_next = apply(nxt)
            q_next = np.vdot(nxt, tx_next).real
            if q_next < q:  # round-off only; keep the better point
                break
            gain = q_next - q
            cur, tx, q = nxt, tx_next, q_next
            if gain <= tol_inner * abs(q):
                break
        state.inner += steps
        f_new, b_new = ratio(cur)
        if f_new > f:
            break
        g = np.vdot(cur, chi @ cur).real + mu - f * b_new
        state.outer = outer + 1
        rel = (f - f_new) / f if f > 0 else 0.0
        s, f = cur, f_new
        state.history.append(f)
        state.g_values.append(g)
        if rel < tol_outer:
            break
    state.s, state.f = s, f
    return state


def s_objective(w, s, mu: float, chi=None) -> float:
    """``f(s)``, for checking results outside the optimizer."""
    w = np.asarray(w, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if chi is None:
        chi = clutter_matrix(w)
    return float((np.vdot(s, chi @ s).real + mu) / abs(np.vdot(w, s)) ** 2)
