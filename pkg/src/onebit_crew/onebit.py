"""One-bit receiver simulation and normalized covariance recovery.

A complex one-bit ADC keeps only the signs of the in-phase and quadrature
parts. For a zero-mean circular Gaussian input the covariance of the sign
data is ``(2/pi) * (arcsin(Re rho) + 1j * arcsin(Im rho))`` elementwise,
where ``rho`` is the normalized (correlation-coefficient) covariance, so
``rho`` is recoverable but the per-channel powers are lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConsistencyError, DomainError, EstimationError

ARCSINE_SLACK = 1e-6


@dataclass(frozen=True)
class NormalizedCovariance:
    """Unit-diagonal Hermitian matrix plus the (optional) channel scales.

    ``scale`` holds the per-channel standard deviations ``sqrt(R_kk)`` when
    they are known; after one-bit estimation it is ``None``.
    """

    matrix: np.ndarray
    scale: Optional[np.ndarray] = None

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SnapshotBatch:
    samples: np.ndarray  # (M, N) complex, one snapshot per row
    seed: Optional[int] = None

    @property
    def M(self) -> int:
        return self.samples.shape[0]


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sqrt_factor(R) -> np.ndarray:
    """A matrix ``L`` with ``L @ L^H == R``.

    Cholesky first; semidefinite inputs fall back to a clipped
    eigendecomposition.
    """
    R = np.asarray(R, dtype=complex)
    try:
        return np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        pass
    ev, U = np.linalg.eigh(0.5 * (R + R.conj().T))
    top = max(ev[-1], 0.0)
    if ev[0] < -1e-10 * max(top, 1e-300):
        raise DomainError(f"covariance is not PSD (lambda_min={ev[0]:.3e})")
    return U * np.sqrt(np.clip(ev, 0.0, None))


def draw_snapshots(R, M: int, seed=None) -> SnapshotBatch:
    """``M`` circular complex Gaussian snapshots with covariance ``R``."""
    if M < 1:
        raise DomainError("M must be >= 1")
    L = sqrt_factor(R)
    rng = _as_rng(seed)
    n = L.shape[0]
    z = (rng.standard_normal((M, n)) + 1j * rng.standard_normal((M, n))) / np.sqrt(2.0)
    return SnapshotBatch(z @ L.T, seed=None if isinstance(seed, np.random.Generator) else seed)


def csign(y) -> np.ndarray:
    """Complex one-bit quantizer ``(sign(Re y) + 1j*sign(Im y)) / sqrt(2)``.

    ``sign(0)`` is taken as ``+1``.
    """
    y = np.asarray(y)
    re = np.where(np.real(y) >= 0, 1.0, -1.0)
    im = np.where(np.imag(y) >= 0, 1.0, -1.0)
    return (re + 1j * im) / np.sqrt(2.0)


def sign_covariance(batch) -> np.ndarray:
    """Sample covariance ``(1/M) sum_m v_m v_m^H`` of the one-bit data."""
    Y = batch.samples if isinstance(batch, SnapshotBatch) else np.atleast_2d(batch)
    V = csign(Y)
    C = V.T @ V.conj() / V.shape[0]
    C = 0.5 * (C + C.conj().T)
    np.fill_diagonal(C, 1.0)
    return C


def arcsine_recover(R_upsilon) -> NormalizedCovariance:
    """Normalized covariance from the one-bit covariance via the arcsine law.

    Real and imaginary parts are mapped separately by ``sin(pi/2 * x)``
    after clipping to ``[-1, 1]``.
    """
    C = np.asarray(R_upsilon, dtype=complex)
    re, im = C.real, C.imag
    worst = max(np.max(np.abs(re)), np.max(np.abs(im)))
    if worst > 1.0 + ARCSINE_SLACK:
        raise EstimationError(
            f"one-bit covariance entry part {worst:.6g} exceeds the [-1, 1] range")
    out = np.sin(0.5 * np.pi * np.clip(re, -1, 1)) + 1j * np.sin(0.5 * np.pi * np.clip(im, -1, 1))
    out = 0.5 * (out + out.conj().T)
    np.fill_diagonal(out, 1.0)
    return NormalizedCovariance(out)


def arcsine_forward(Rbar) -> np.ndarray:
    """Expected one-bit covariance for a given normalized covariance."""
    Rbar = np.asarray(Rbar, dtype=complex)
    return (2.0 / np.pi) * (np.arcsin(np.clip(Rbar.real, -1, 1))
                            + 1j * np.arcsin(np.clip(Rbar.imag, -1, 1)))


def normalize(R) -> NormalizedCovariance:
    """``D^{-1/2} R D^{-1/2}`` with ``D`` the diagonal of ``R``; keeps ``sqrt(diag R)``."""
    R = np.asarray(R, dtype=complex)
    diag = R.diagonal().real
    if np.any(diag <= 0):
        raise DomainError("covariance diagonal must be strictly positive")
    d = np.sqrt(diag)
    Rbar = R / np.outer(d, d)
    np.fill_diagonal(Rbar, 1.0)
    return NormalizedCovariance(Rbar, d)


def denormalize(Rbar, d, check: bool = True) -> np.ndarray:
    """``Diag(d) Rbar Diag(d)``.

    With ``check`` the Hadamard form ``(d d^H) * Rbar`` is computed as well
    and the two must agree to ``1e-14`` relative.
    """
    M = Rbar.matrix if isinstance(Rbar, NormalizedCovariance) else np.asarray(Rbar)
    d = np.asarray(d, dtype=float)
    if d.shape != (M.shape[0],):
        raise DomainError("scale length does not match the matrix")
    if np.any(d <= 0):
        raise DomainError("scale must be strictly positive")
    R = np.diag(d) @ M @ np.diag(d)
    if check:
        H = np.outer(d, d) * M
        err = np.linalg.norm(R - H)
        if err > 1e-14 * max(np.linalg.norm(H), 1e-300):
            raise ConsistencyError(f"denormalize forms disagree (err={err:.3e})")
    return R


def nearest_correlation(Rbar, floor: float = 1e-6) -> np.ndarray:
    """Project a unit-diagonal Hermitian estimate onto positive-definite
    correlation matrices (eigenvalue floor, then rescale to unit diagonal)."""
    M = np.asarray(Rbar, dtype=complex)
    ev, U = np.linalg.eigh(0.5 * (M + M.conj().T))
    if ev[0] >= floor:
        return M
    ev = np.clip(ev, floor, None)
    P = (U * ev) @ U.conj().T
    d = np.sqrt(P.diagonal().real)
    P = P / np.outer(d, d)
    P = 0.5 * (P + P.conj().T)
    np.fill_diagonal(P, 1.0)
    return P


def estimate_normalized(R, M: int, seed=None, chunk: int = 100_000) -> NormalizedCovariance:
    """One-bit estimate of ``normalize(R)`` from ``M`` simulated snapshots.

    Snapshots are generated and quantized in chunks so ``M = 1e6`` does not
    hold all samples in memory at once.
    """
    rng = _as_rng(seed)
    L = sqrt_factor(R)
    n = L.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    done = 0
    while done < M:
        m = min(chunk, M - done)
        z = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
        V = csign(z @ L.T)
        acc += V.T @ V.conj()
        done += m
    C = acc / M
    C = 0.5 * (C + C.conj().T)
    np.fill_diagonal(C, 1.0)
    return arcsine_recover(C)
