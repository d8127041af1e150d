"""Deterministic radar signal model.

Shift operators, clutter and interference covariances, the MSE of the
mismatched-filter estimate of the range-cell amplitude, jamming spectra and
the Golomb initial waveform.

Vectors are 1-D complex ``ndarray``; covariances are dense ``(N, N)``
complex Hermitian arrays.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .exceptions import ConditioningError, ConfigError, DegenerateFilterError, DomainError
from .scenario import ScenarioConfig

UNIMODULAR_TOL = 1e-12
PSD_CLIP_TOL = 1e-12
LOADING_RATIO = 1e-10


def shift(v, k: int) -> np.ndarray:
    """Apply the shift matrix ``J_k`` to ``v`` without forming it.

    ``k >= 0`` moves entries down by ``k`` (leading zeros); ``k < 0`` is the
    adjoint shift up by ``|k|`` (trailing zeros).
    """
    v = np.asarray(v)
    n = v.shape[0]
    if abs(k) >= n:
        raise DomainError(f"shift index {k} out of range for N={n}")
    out = np.zeros_like(v)
    if k >= 0:
        out[k:] = v[: n - k]
    else:
        out[: n + k] = v[-k:]
    return out


def aperiodic_autocorr(x) -> np.ndarray:
    """Lags ``r_m = sum_k x_{k+m} conj(x_k)`` for ``m = 0..N-1``."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    nfft = 1 << max(1, int(2 * n - 1).bit_length())
    X = np.fft.fft(x, nfft)
    return np.fft.ifft(np.abs(X) ** 2)[:n]


def clutter_matrix(x) -> np.ndarray:
    """``sum_{k != 0} J_k x x^H J_k^H``.

    The full sum over all ``k`` is the Hermitian Toeplitz matrix of the
    aperiodic autocorrelation of ``x``; the ``k = 0`` term ``x x^H`` is then
    removed.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.shape[0] < 1:
        raise DomainError("clutter_matrix expects a nonempty vector")
    r = _direct_autocorr(x)
    full = sla.toeplitz(r)  # first column r_m, first row conj(r_m)
    return full - np.outer(x, x.conj())


def _direct_autocorr(x):
    # exact O(N^2) lags; FFT round-off would break the brute-force 1e-12 match
    n = x.shape[0]
    return np.array([np.vdot(x[: n - m], x[m:]) for m in range(n)])


def isl(s) -> float:
    """Integrated sidelobe level ``2 * sum_{m>=1} |r_m|^2``."""
    s = np.asarray(s, dtype=complex)
    if s.shape[0] < 2:
        return 0.0
    r = aperiodic_autocorr(s)
    return float(2.0 * np.sum(np.abs(r[1:]) ** 2))


def mse(w, s, R) -> float:
    """MSE of the mismatched-filter estimate: ``w^H R w / |w^H s|^2``."""
    w = np.asarray(w, dtype=complex)
    s = np.asarray(s, dtype=complex)
    gain = np.vdot(w, s)
    if abs(gain) <= 1e-12 * np.linalg.norm(w) * np.linalg.norm(s):
        raise DegenerateFilterError("|w^H s| is numerically zero")
    num = np.vdot(w, np.asarray(R) @ w).real
    return float(num / abs(gain) ** 2)


def mmf(R, s) -> np.ndarray:
    """Mismatched filter ``R^{-1} s`` (minimizer of :func:`mse` over ``w``).

    A tiny diagonal load ``1e-10 * tr(R) / N`` is added when the eigenvalue
    ratio falls below ``1e-10``.
    """
    R = np.asarray(R, dtype=complex)
    s = np.asarray(s, dtype=complex)
    n = R.shape[0]
    ev = np.linalg.eigvalsh(R)
    if ev[-1] <= 0:
        raise ConditioningError("covariance has no positive eigenvalue")
    if ev[0] < LOADING_RATIO * ev[-1]:
        R = R + (LOADING_RATIO * np.trace(R).real / n) * np.eye(n)
    try:
        cf = sla.cho_factor(R, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("covariance is singular after loading") from exc
    return sla.cho_solve(cf, s)


def true_covariance(s, beta: float, Gamma) -> np.ndarray:
    """Clutter-plus-interference covariance ``beta * S(s) + Gamma``."""
    return beta * clutter_matrix(s) + np.asarray(Gamma)


def jamming_spectrum(scenario: ScenarioConfig) -> np.ndarray:
    """Jamming power spectrum on the grid ``p / (2N - 1)``, unit total mass."""
    n = scenario.N
    L = 2 * n - 1
    eta = np.zeros(L)
    jam = scenario.jamming
    if jam.kind == "none":
        return eta
    if jam.kind == "spot":
        eta[int(np.rint(jam.f0 * L)) % L] = 1.0
        return eta
    grid = np.arange(L) / L
    inside = (grid >= jam.f1 - 1e-12) & (grid <= jam.f2 + 1e-12)
    if not inside.any():
        raise ConfigError(
            f"barrage band [{jam.f1}, {jam.f2}] holds no grid point for N={n}")
    eta[inside] = 1.0 / inside.sum()
    return eta


def jamming_covariance(eta) -> np.ndarray:
    """Toeplitz covariance whose lags are the inverse DFT of ``eta``.

    ``eta`` has length ``2N - 1``; lag ``m`` is
    ``sum_p eta_p exp(2j*pi*p*m/(2N-1)) / (2N-1)``.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0):
        raise DomainError("jamming spectrum must be nonnegative")
    L = eta.shape[0]
    if L % 2 == 0:
        raise DomainError("spectrum length must be odd (2N - 1)")
    n = (L + 1) // 2
    gamma = np.fft.ifft(eta)  # gamma[m] for m >= 0, gamma[L - m] for -m
    col = gamma[:n]
    G = sla.toeplitz(col)  # row = conj(col), matching gamma_{-m} = conj(gamma_m)
    return repair_psd(G)


def interference_covariance(scenario: ScenarioConfig) -> np.ndarray:
    """Noise-plus-jamming covariance ``sigmaJ2 * Gamma_J + sigma2 * I``."""
    n = scenario.N
    G = scenario.sigma2 * np.eye(n, dtype=complex)
    if scenario.jamming.kind != "none" and scenario.sigmaJ2 > 0:
        G = G + scenario.sigmaJ2 * jamming_covariance(jamming_spectrum(scenario))
    return G


def golomb(N: int) -> np.ndarray:
    """Golomb polyphase sequence ``exp(j*pi*k*(k-1)/N)``, ``k = 1..N``."""
    if N < 1:
        raise DomainError("N must be positive")
    k = np.arange(1, N + 1, dtype=float)
    return np.exp(1j * np.pi * k * (k - 1) / N)


def is_unimodular(s, tol: float = UNIMODULAR_TOL) -> bool:
    return bool(np.all(np.abs(np.abs(np.asarray(s)) - 1.0) <= tol))


def repair_psd(M, tol: float = PSD_CLIP_TOL) -> np.ndarray:
    """Symmetrize ``M`` and clip tiny negative eigenvalues to zero.

    Raises :class:`DomainError` when an eigenvalue is below
    ``-tol * lambda_max``.
    """
    M = np.asarray(M, dtype=complex)
    M = 0.5 * (M + M.conj().T)
    ev, U = np.linalg.eigh(M)
    top = max(ev[-1], 0.0)
    if ev[0] >= 0:
        return M
    if ev[0] < -tol * max(top, np.finfo(float).tiny):
        raise DomainError(f"matrix is not PSD (lambda_min={ev[0]:.3e})")
    ev = np.clip(ev, 0.0, None)
    return (U * ev) @ U.conj().T


def check_hermitian_psd(M, herm_tol: float = 1e-10, psd_tol: float = 1e-8) -> bool:
    """True when ``M`` is Hermitian and PSD within the usual relative slacks."""
    M = np.asarray(M)
    scale = np.linalg.norm(M)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > herm_tol * max(scale, 1e-300):
        return False
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    return bool(ev[0] >= -psd_tol * max(ev[-1], 0.0))
