"""Joint waveform / receive-filter design algorithms.

``crew_onebit``
    Alternating design when the receiver only sees normalized statistics:
    unimodular s-step, then a (d, a, beta) fit of the normalized
    covariance, a running estimate of E{d d^H}, and the filter
    ``Q^{-1} s`` with ``Q = E{d d^H} * Rbar``.
``crew_cyclic``
    The same alternation with exact statistics (``w = R^{-1} s``).
``can_mmf``
    Low-ISL waveform from the CAN iteration with an exact-statistics
    mismatched filter; no interference knowledge enters the waveform.

All randomness is drawn from ``numpy.random.default_rng(scenario.seed)``.
Scoring always uses the true covariance, never the estimated one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import covfit, onebit, radar, uqp
from .scenario import ScenarioConfig

log = logging.getLogger(__name__)

SNAPSHOT_CHUNK = 20_000


@dataclass
class DesignOutcome:
    """Designed waveform and filter with the per-iteration true MSE.

    ``mse_trajectory[0]`` is the MSE of the starting pair; one entry is
    appended per outer iteration. ``estimated_trajectory`` holds the
    algorithm's own objective (only differs from the true MSE for
    ``crew_onebit``).
    """

    algorithm: str
    s: np.ndarray
    w: np.ndarray
    mse_trajectory: list = field(default_factory=list)
    estimated_trajectory: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    seed: int | None = None

    @property
    def final_mse(self) -> float:
        return self.mse_trajectory[-1]

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_mse": self.final_mse,
            "mse_trajectory": list(map(float, self.mse_trajectory)),
            "estimated_trajectory": list(map(float, self.estimated_trajectory)),
            "s": [[float(z.real), float(z.imag)] for z in self.s],
            "w": [[float(z.real), float(z.imag)] for z in self.w],
        }


def _random_filter(rng, n):
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return w / np.linalg.norm(w)


def _converged(prev, cur, tol):
    return abs(cur - prev) < tol * abs(prev)


def evaluate_true_mse(outcome: DesignOutcome, scenario: ScenarioConfig) -> float:
    """MSE of the outcome's (w, s) pair under the scenario's true covariance."""
    G = radar.interference_covariance(scenario)
    R = radar.true_covariance(outcome.s, scenario.beta, G)
    return radar.mse(outcome.w, outcome.s, R)


def _s_step(w, s, mu, sc: ScenarioConfig):
    return uqp.dinkelbach_s_step(
        w, s, mu, tol_outer=sc.dinkelbach_tol, cap_outer=sc.dinkelbach_cap,
        tol_inner=sc.power_tol, cap_inner=sc.power_cap)


def crew_cyclic(scenario: ScenarioConfig) -> DesignOutcome:
    """Alternate the unimodular s-step and ``w = R(s)^{-1} s`` with exact statistics."""
    sc = scenario
    rng = np.random.default_rng(sc.seed)
    G = radar.interference_covariance(sc)
    s = radar.golomb(sc.N)
    w = _random_filter(rng, sc.N)
    if sc.w_init == "wstep":
        w = radar.mmf(radar.true_covariance(s, sc.beta, G), s)
    traj = [radar.mse(w, s, radar.true_covariance(s, sc.beta, G))]
    out = DesignOutcome("crew_cyclic", s, w, traj, list(traj), seed=sc.seed)
    for t in range(sc.outer_cap):
        mu = float(np.vdot(w, G @ w).real / sc.beta)
        s = _s_step(w, s, mu, sc).s
        R = radar.true_covariance(s, sc.beta, G)
        w = radar.mmf(R, s)
        traj.append(radar.mse(w, s, R))
        out.iterations = t + 1
        if _converged(traj[-2], traj[-1], sc.outer_tol):
            out.converged = True
            break
    out.s, out.w = s, w
    out.estimated_trajectory = list(traj)
    return out


def simulate_returns(s, beta: float, Gamma, M: int, rng) -> np.ndarray:
    """``M`` received snapshots (rows) of clutter plus interference.

    Each snapshot is ``sum_{k != 0} alpha_k J_k s + eps`` with
    ``alpha_k ~ CN(0, beta)`` and ``eps ~ CN(0, Gamma)``; the cell under
    test carries no target.
    """
    s = np.asarray(s, dtype=complex)
    n = s.shape[0]
    eps = onebit.draw_snapshots(Gamma, M, rng).samples
    if n == 1:
        return eps
    B = np.stack([radar.shift(s, k) for k in range(-(n - 1), n) if k != 0], axis=1)
    alpha = np.sqrt(beta / 2.0) * (rng.standard_normal((M, B.shape[1]))
                                  + 1j * rng.standard_normal((M, B.shape[1])))
    return alpha @ B.T + eps


def measure_normalized(sample, M: int) -> np.ndarray:
    """One-bit estimate of a normalized covariance.

    ``sample(m)`` must return ``m`` snapshots as rows; they are quantized in
    chunks and the result is projected to a positive-definite correlation
    matrix.
    """
    acc = None
    done = 0
    while done < M:
        m = min(SNAPSHOT_CHUNK, M - done)
        V = onebit.csign(sample(m))
        part = V.T @ V.conj()
        acc = part if acc is None else acc + part
        done += m
    C = acc / M
    C = 0.5 * (C + C.conj().T)
    np.fill_diagonal(C, 1.0)
    return onebit.nearest_correlation(onebit.arcsine_recover(C).matrix)


def crew_onebit(scenario: ScenarioConfig) -> DesignOutcome:
    """Joint design from normalized (one-bit) statistics.

    One outer iteration is an s-step with the current ``mu`` estimate
    followed by a w-step: measure the normalized covariance under the new
    ``s`` (analytic in oracle mode, one-bit sample estimate otherwise), fit
    ``(d, a, beta)``, fold ``d`` into the running ``E{d d^H}``, form ``Q``
    and set ``w = Q^{-1} s``. Stops when the estimated objective
    ``w^H Q w / |w^H s|^2`` changes by less than ``outer_tol`` (relative).

    With ``w_init="wstep"`` a w-step on the Golomb start precedes the loop;
    with ``"random"`` the loop starts from a random filter and the first
    ``mu`` uses unit interference scales and ``beta = 1``.
    """
    sc = scenario
    n = sc.N
    rng = np.random.default_rng(sc.seed)
    G = radar.interference_covariance(sc)
    s = radar.golomb(n)
    w = _random_filter(rng, n)

    def listen():
        if sc.oracle_mode:
            return onebit.normalize(G).matrix
        return measure_normalized(lambda m: onebit.draw_snapshots(G, m, rng).samples,
                                  sc.snapshots)

    state = {"fit": None, "moment": covfit.MomentEstimate.empty(n)}

    def w_step(s, Gbar):
        R_true = radar.true_covariance(s, sc.beta, G)
        if sc.oracle_mode:
            Rbar = onebit.normalize(R_true).matrix
        else:
            Rbar = measure_normalized(
                lambda m: simulate_returns(s, sc.beta, G, m, rng), sc.snapshots)
        fr = covfit.fit(Rbar, Gbar, radar.clutter_matrix(s), init=state["fit"],
                        tol=sc.fit_tol, max_sweeps=sc.fit_cap)
        state["fit"] = fr
        state["moment"] = covfit.update_moment(state["moment"], fr.d)
        Q = covfit.build_Q(state["moment"], Rbar)
        w = radar.mmf(Q, s)
        log.debug("crew_onebit fit: rel residual %.2e after %d iterations",
                  fr.relative_residual(Rbar), fr.iterations)
        return w, radar.mse(w, s, R_true), radar.mse(w, s, Q)

    Gbar = listen()
    a_hat, beta_hat = np.ones(n), 1.0
    est_traj = []
    if sc.w_init == "wstep":
        w, true0, est0 = w_step(s, Gbar)
        a_hat, beta_hat = state["fit"].a, state["fit"].beta
        est_traj.append(est0)
    else:
        true0 = radar.mse(w, s, radar.true_covariance(s, sc.beta, G))
    traj = [true0]
    out = DesignOutcome("crew_onebit", s, w, traj, est_traj, seed=sc.seed)
    for t in range(sc.outer_cap):
        mu = uqp.mu_estimate(w, Gbar, a_hat, beta_hat)
        s = _s_step(w, s, mu, sc).s
        if t > 0 or sc.w_init == "wstep":
            Gbar = listen()
        w, true_mse, est_mse = w_step(s, Gbar)
        a_hat, beta_hat = state["fit"].a, state["fit"].beta
        traj.append(true_mse)
        est_traj.append(est_mse)
        out.iterations = t + 1
        if len(est_traj) > 1 and _converged(est_traj[-2], est_traj[-1], sc.outer_tol):
            out.converged = True
            break
    out.s, out.w = s, w
    return out


def can_design(s0, *, tol: float = 1e-6, cap: int = 10_000) -> np.ndarray:
    """CAN iteration for low integrated sidelobe level.

    Alternates between the unimodular spectrum closest to the 2N-point DFT
    of the zero-padded sequence and the unimodular sequence closest to its
    inverse DFT. The lowest-ISL iterate is returned.
    """
    x = np.asarray(s0, dtype=complex)
    n = x.shape[0]
    if n == 1:
        return x.copy()
    best, best_isl = x.copy(), radar.isl(x)
    prev = best_isl
    for _ in range(cap):
        z = np.fft.fft(x, 2 * n)
        v = np.exp(1j * np.angle(z))
        g = np.fft.ifft(v)[:n]
        x = np.exp(1j * np.angle(g))
        cur = radar.isl(x)
        if cur < best_isl:
            best, best_isl = x.copy(), cur
        if abs(prev - cur) <= tol * prev:
            break
        prev = cur
    return best


def can_mmf(scenario: ScenarioConfig) -> DesignOutcome:
    """CAN waveform from a Golomb start, then the exact-statistics filter."""
    sc = scenario
    G = radar.interference_covariance(sc)
    s = can_design(radar.golomb(sc.N), tol=sc.can_tol, cap=sc.can_cap)
    R = radar.true_covariance(s, sc.beta, G)
    w = radar.mmf(R, s)
    m = radar.mse(w, s, R)
    return DesignOutcome("can_mmf", s, w, [m], [m], iterations=1, converged=True, seed=sc.seed)


ALGORITHMS = {
    "crew_onebit": crew_onebit,
    "crew_cyclic": crew_cyclic,
    "can_mmf": can_mmf,
}


def design(algorithm: str, scenario: ScenarioConfig) -> DesignOutcome:
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise KeyError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(scenario)
