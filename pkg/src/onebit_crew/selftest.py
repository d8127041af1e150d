"""Fast invariant checks runnable without pytest (``onebit-crew selftest``)."""

from __future__ import annotations

import time

import numpy as np

from . import covfit, onebit, radar, uqp
from .crew import can_design, crew_cyclic
from .scenario import ScenarioConfig


def _random_hpd(rng, n, cond=10.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(A)
    ev = np.linspace(1.0, cond, n)
    return (Q * ev) @ Q.conj().T


def check_clutter_matrix(rng):
    for n in (1, 2, 5, 9):
        x = np.exp(2j * np.pi * rng.random(n))
        brute = sum(np.outer(radar.shift(x, k), radar.shift(x, k).conj())
                    for k in range(-(n - 1), n) if k != 0) if n > 1 else np.zeros((1, 1))
        if np.max(np.abs(radar.clutter_matrix(x) - brute)) > 1e-12:
            return False
    return True


def check_mmf_optimal(rng):
    n = 6
    R = _random_hpd(rng, n)
    s = np.exp(2j * np.pi * rng.random(n))
    w = radar.mmf(R, s)
    best = radar.mse(w, s, R)
    for _ in range(20):
        v = w + 0.1 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        if radar.mse(v, s, R) < best - 1e-12:
            return False
    return True


def check_arcsine_roundtrip(rng):
    Rbar = onebit.normalize(_random_hpd(rng, 5)).matrix
    back = onebit.arcsine_recover(onebit.arcsine_forward(Rbar)).matrix
    return np.max(np.abs(back - Rbar)) < 1e-12


def check_power_monotone(rng):
    n = 8
    Tt = _random_hpd(rng, n)
    s = np.exp(2j * np.pi * rng.random(n))
    q = np.vdot(s, Tt @ s).real
    for _ in range(30):
        s = uqp.power_step(Tt, s)
        q_new = np.vdot(s, Tt @ s).real
        if q_new < q - 1e-12:
            return False
        q = q_new
    return True


def check_dinkelbach_descent(rng):
    n = 8
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    s0 = np.exp(2j * np.pi * rng.random(n))
    st = uqp.dinkelbach_s_step(w, s0, mu=0.5)
    h = np.asarray(st.history)
    return bool(np.all(np.diff(h) <= 1e-12)) and radar.is_unimodular(st.s)


def check_fit_zero_residual(rng):
    n = 6
    s = np.exp(2j * np.pi * rng.random(n))
    S = radar.clutter_matrix(s)
    Gbar = onebit.normalize(_random_hpd(rng, n)).matrix
    a = 0.5 + rng.random(n)
    R = 1.3 * S + (a[:, None] * a[None, :]) * Gbar
    Rbar = onebit.normalize(R).matrix
    fr = covfit.fit(Rbar, Gbar, S)
    return fr.relative_residual(Rbar) < 1e-6


def check_q_dual_form(rng):
    n = 7
    est = covfit.MomentEstimate.empty(n)
    for _ in range(3):
        est = covfit.update_moment(est, 0.5 + rng.random(n))
    Rbar = onebit.normalize(_random_hpd(rng, n)).matrix
    covfit.build_Q(est, Rbar, check=True)  # raises on disagreement
    return True


def check_can_descent(rng):
    s0 = radar.golomb(16)
    return radar.isl(can_design(s0)) <= radar.isl(s0) + 1e-9


def check_cyclic_monotone(rng):
    sc = ScenarioConfig(N=8, seed=int(rng.integers(2**32)))
    traj = np.asarray(crew_cyclic(sc).mse_trajectory)
    return bool(np.all(np.diff(traj) <= 1e-10 * traj[:-1]))


CHECKS = [
    ("clutter matrix equals shift sum", check_clutter_matrix),
    ("mismatched filter is MSE-optimal", check_mmf_optimal),
    ("arcsine law round trip", check_arcsine_roundtrip),
    ("power step monotone", check_power_monotone),
    ("Dinkelbach descent", check_dinkelbach_descent),
    ("covariance fit zero residual", check_fit_zero_residual),
    ("Q dual form agreement", check_q_dual_form),
    ("CAN lowers ISL", check_can_descent),
    ("cyclic trajectory monotone", check_cyclic_monotone),
]


def run(verbose: bool = False, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            passed = bool(fn(rng))
            note = ""
        except Exception as exc:
            passed, note = False, f" ({type(exc).__name__}: {exc})"
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}  [{time.perf_counter() - t0:.2f}s]{note}")
    return ok
