import numpy as np
import pytest

from onebit_crew import covfit, onebit, radar
from onebit_crew.exceptions import ConsistencyError, DomainError

from conftest import random_hpd, unimodular


def synthetic(rng, n=8, beta0=1.0):
    """Zero-residual instance: R = beta0 S + Gamma, observed only after normalization."""
    s = unimodular(rng, n)
    S = radar.clutter_matrix(s)
    G = random_hpd(rng, n)
    R = beta0 * S + G
    return onebit.normalize(R).matrix, onebit.normalize(G).matrix, S, R


def residual_vector(theta, Rbar, Gbar, S):
    n = Rbar.shape[0]
    d, a, beta = theta[:n], theta[n:2 * n], theta[-1]
    E = np.outer(d, d) * Rbar - beta * S - np.outer(a, a) * Gbar
    return np.concatenate([E.real.ravel(), E.imag.ravel()])


def test_objective_matches_norm(rng):
    Rbar, Gbar, S, _ = synthetic(rng, 5)
    d, a = rng.uniform(0.5, 2, 5), rng.uniform(0.5, 2, 5)
    E = np.diag(d) @ Rbar @ np.diag(d) - 0.4 * S - np.diag(a) @ Gbar @ np.diag(a)
    assert covfit.objective(d, a, 0.4, Rbar, Gbar, S) == pytest.approx(np.linalg.norm(E) ** 2)


def test_gradients_finite_difference(rng):
    Rbar, Gbar, S, _ = synthetic(rng, 6)
    d, a, beta = rng.uniform(0.5, 2, 6), rng.uniform(0.5, 2, 6), 0.7
    h = 1e-6
    for grad, which in ((covfit.grad_d, 0), (covfit.grad_a, 1)):
        g = grad(d, a, beta, Rbar, Gbar, S)
        fd = np.empty(6)
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            args_p = [d + e, a] if which == 0 else [d, a + e]
            args_m = [d - e, a] if which == 0 else [d, a - e]
            fd[k] = (covfit.objective(*args_p, beta, Rbar, Gbar, S)
                     - covfit.objective(*args_m, beta, Rbar, Gbar, S)) / (2 * h)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-6)


def test_gauss_newton_against_numeric_jacobian(rng):
    n = 5
    Rbar, Gbar, S, _ = synthetic(rng, n)
    theta = np.concatenate([rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), [0.6]])
    r0 = residual_vector(theta, Rbar, Gbar, S)
    J = np.empty((r0.size, theta.size))
    h = 1e-7
    for k in range(theta.size):
        e = np.zeros(theta.size)
        e[k] = h
        J[:, k] = (residual_vector(theta + e, Rbar, Gbar, S)
                   - residual_vector(theta - e, Rbar, Gbar, S)) / (2 * h)
    g, H = covfit._gauss_newton(theta[:n], theta[n:2 * n], theta[-1], Rbar, Gbar, S)
    np.testing.assert_allclose(g, J.T @ r0, rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(H, J.T @ J, rtol=1e-6, atol=1e-7)


def test_closed_form_beta_is_least_squares(rng):
    Rbar, Gbar, S, _ = synthetic(rng, 6)
    d, a = rng.uniform(0.5, 2, 6), rng.uniform(0.1, 0.5, 6)
    b = covfit.closed_form_beta(d, a, Rbar, Gbar, S)
    f = covfit.objective(d, a, b, Rbar, Gbar, S)
    for db in (-1e-3, 1e-3):
        if b + db > 0:
            assert covfit.objective(d, a, b + db, Rbar, Gbar, S) >= f


@pytest.mark.parametrize("beta0", [0.5, 1.0, 2.0])
def test_fit_zero_residual(rng, beta0):
    for _ in range(10):
        Rbar, Gbar, S, R = synthetic(rng, 8, beta0)
        fr = covfit.fit(Rbar, Gbar, S)
        assert fr.relative_residual(Rbar) <= 1e-6
        # absolute form: residual in the scale of the recovered R
        scale = np.linalg.norm(fr.reconstruction(Rbar)) / np.linalg.norm(R)
        assert fr.residual <= 1e-6 * (scale * np.linalg.norm(R)) ** 2


def test_fit_recovers_scale_up_to_gauge(rng):
    Rbar, Gbar, S, R = synthetic(rng, 8, 1.0)
    fr = covfit.fit(Rbar, Gbar, S)
    c = np.sqrt(np.diag(R).real) / fr.d
    # whatever factorization was found, the reconstruction is a multiple of R
    np.testing.assert_allclose(fr.reconstruction(Rbar) * c[0] ** 2, R, rtol=1e-5, atol=1e-5)


def test_fit_no_clutter_limit(rng):
    n = 8
    S = radar.clutter_matrix(unimodular(rng, n))
    G = random_hpd(rng, n)
    Gbar = onebit.normalize(G).matrix
    fr = covfit.fit(Gbar, Gbar, S)
    assert fr.beta <= 1e-6
    assert fr.relative_residual(Gbar) <= 1e-6


def test_fit_degenerate_flag():
    Gbar = np.eye(3, dtype=complex)
    fr = covfit.fit(Gbar, Gbar, np.zeros((3, 3)))
    assert fr.degenerate
    assert fr.relative_residual(Gbar) <= 1e-10


@pytest.mark.parametrize("method", ["lm", "bcd"])
def test_fit_history_nonincreasing(rng, method):
    for _ in range(100 if method == "lm" else 20):
        n = int(rng.integers(3, 9))
        Rbar = onebit.normalize(random_hpd(rng, n)).matrix
        Gbar = onebit.normalize(random_hpd(rng, n)).matrix
        S = radar.clutter_matrix(unimodular(rng, n))
        fr = covfit.fit(Rbar, Gbar, S, init=(np.ones(n), np.ones(n), 1.0), method=method,
                        max_sweeps=60)
        h = np.asarray(fr.history)
        assert np.all(np.diff(h) <= 1e-12 * h[:-1])
        assert np.all(fr.d >= covfit.FLOOR) and np.all(fr.a >= covfit.FLOOR)
        assert fr.beta >= covfit.FLOOR


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_fit_scale_equivariance(rng, c):
    Rbar, Gbar, S, _ = synthetic(rng, 8, 1.0)
    f1 = covfit.fit(Rbar, Gbar, S)
    f2 = covfit.fit(Rbar, Gbar, c * S)
    assert f2.beta == pytest.approx(f1.beta / c, rel=1e-5)
    np.testing.assert_allclose(f2.reconstruction(Rbar), f1.reconstruction(Rbar), rtol=1e-5, atol=1e-8)


def test_fit_warm_start(rng):
    Rbar, Gbar, S, _ = synthetic(rng, 8)
    cold = covfit.fit(Rbar, Gbar, S)
    warm = covfit.fit(Rbar, Gbar, S, init=cold)
    assert warm.residual <= cold.residual * (1 + 1e-12) + 1e-30


def test_fit_rejects_shape_mismatch():
    with pytest.raises(DomainError):
        covfit.fit(np.eye(3), np.eye(2), np.eye(3))


def test_moment_single_and_repeat(rng):
    d = rng.uniform(0.5, 2, 4)
    e1 = covfit.update_moment(covfit.MomentEstimate.empty(4), d)
    base = np.outer(d, d)
    np.testing.assert_allclose(e1.second_moment, base + e1.loading * np.eye(4))
    e2 = covfit.update_moment(e1, d)
    np.testing.assert_allclose(e2.second_moment, e1.second_moment)
    assert e1.count == 1 and e2.count == 2


def test_moment_direct_average(rng):
    d0 = rng.uniform(1, 2, 5)
    est = covfit.MomentEstimate.empty(5)
    samples = [d0 + 0.1 * rng.standard_normal(5) for _ in range(400)]
    for d in samples:
        est = covfit.update_moment(est, d)
    direct = np.mean([np.outer(d, d) for d in samples], axis=0)
    np.testing.assert_allclose(est.mean, direct, rtol=1e-12)
    C = np.cov(np.array(samples).T, bias=True)
    mu = np.mean(samples, axis=0)
    np.testing.assert_allclose(est.mean, np.outer(mu, mu) + C, rtol=1e-10)
    ev = np.linalg.eigvalsh(est.second_moment)
    assert ev[0] >= 0


def test_moment_empty_raises():
    with pytest.raises(DomainError):
        covfit.MomentEstimate.empty(3).second_moment


def test_build_Q_examples(rng):
    Rbar = onebit.normalize(random_hpd(rng, 5)).matrix
    np.testing.assert_allclose(covfit.build_Q(np.ones((5, 5)), Rbar), Rbar, atol=1e-14)
    np.testing.assert_allclose(covfit.build_Q(np.eye(5), Rbar), np.eye(5), atol=1e-14)


def test_build_Q_dual_form(rng):
    for _ in range(20):
        n = 16
        A = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
        M = A @ A.conj().T
        Rbar = onebit.normalize(random_hpd(rng, n)).matrix
        Q_h = covfit.build_Q(M, Rbar)
        # independent eigen-sum: sum_k nu_k Diag(u_k) Rbar Diag(u_k)^H
        nu, U = np.linalg.eigh(M)
        Q_e = sum(nu[k] * np.diag(U[:, k]) @ Rbar @ np.diag(U[:, k]).conj().T for k in range(n))
        assert np.linalg.norm(Q_h - Q_e) <= 1e-12 * np.linalg.norm(Q_h)
        assert np.linalg.eigvalsh(Q_h)[0] >= -1e-8


def test_build_Q_detects_disagreement(monkeypatch, rng):
    Rbar = onebit.normalize(random_hpd(rng, 4)).matrix
    monkeypatch.setattr(covfit, "q_from_evd", lambda M, R: 2 * (M * R))
    with pytest.raises(ConsistencyError):
        covfit.build_Q(np.ones((4, 4)), Rbar)
