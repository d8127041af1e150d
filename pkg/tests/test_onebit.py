import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebit_crew import onebit
from onebit_crew.exceptions import ConsistencyError, DomainError, EstimationError

from conftest import random_hpd

SQ2 = np.sqrt(2.0)


def test_csign_examples():
    assert onebit.csign(np.array([3 - 4j]))[0] == pytest.approx((1 - 1j) / SQ2)
    assert onebit.csign(np.array([0j]))[0] == pytest.approx((1 + 1j) / SQ2)
    assert onebit.csign(np.array([-0.0 - 0.0j]))[0] == pytest.approx((1 + 1j) / SQ2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=20))
def test_csign_unit_modulus_and_idempotent(vals):
    y = np.array(vals, dtype=complex)
    v = onebit.csign(y)
    np.testing.assert_allclose(np.abs(v), 1.0, rtol=1e-15)
    np.testing.assert_array_equal(onebit.csign(v), v)


def test_draw_snapshots_zero_and_determinism(rng):
    b = onebit.draw_snapshots(np.zeros((3, 3)), 5, seed=1)
    assert b.M == 5 and np.all(b.samples == 0)
    R = random_hpd(rng, 4)
    a1 = onebit.draw_snapshots(R, 50, seed=7).samples
    a2 = onebit.draw_snapshots(R, 50, seed=7).samples
    np.testing.assert_array_equal(a1, a2)


def test_draw_snapshots_sample_covariance():
    Y = onebit.draw_snapshots(np.eye(4), 10**6, seed=3).samples
    C = Y.T @ Y.conj() / Y.shape[0]
    assert np.max(np.abs(C - np.eye(4))) <= 5e-3


def test_draw_snapshots_semidefinite():
    v = np.array([1.0, 1j, -1.0])
    R = np.outer(v, v.conj())
    Y = onebit.draw_snapshots(R, 10, seed=0).samples
    # every snapshot lies on span{v}
    np.testing.assert_allclose(Y[:, 1], 1j * Y[:, 0], atol=1e-10)


def test_draw_snapshots_rejects_indefinite():
    with pytest.raises(DomainError):
        onebit.draw_snapshots(np.diag([1.0, -1.0]), 3, seed=0)


def test_sign_covariance_single_and_diagonal(rng):
    b = onebit.draw_snapshots(random_hpd(rng, 5), 1, seed=2)
    C = onebit.sign_covariance(b)
    v = onebit.csign(b.samples[0])
    np.testing.assert_allclose(C, np.outer(v, v.conj()), atol=1e-15)
    assert np.linalg.matrix_rank(C) == 1
    assert np.all(C.diagonal() == 1)


def test_sign_covariance_white():
    C = onebit.sign_covariance(onebit.draw_snapshots(np.eye(4), 10**6, seed=11))
    off = C - np.diag(C.diagonal())
    assert np.max(np.abs(off)) <= 5e-3


def test_arcsine_recover_examples():
    np.testing.assert_array_equal(onebit.arcsine_recover(np.eye(3)).matrix, np.eye(3))
    C = np.array([[1, 0.5], [0.5, 1]], dtype=complex)
    assert onebit.arcsine_recover(C).matrix[0, 1] == pytest.approx(0.7071067811865476, abs=1e-15)


def test_arcsine_recover_clips_and_rejects():
    C = np.array([[1, 1 + 1e-8], [1 + 1e-8, 1]], dtype=complex)
    assert onebit.arcsine_recover(C).matrix[0, 1] == 1.0
    with pytest.raises(EstimationError):
        onebit.arcsine_recover(np.array([[1, 1.2], [1.2, 1]], dtype=complex))


def test_arcsine_round_trip(rng):
    for _ in range(50):
        Rbar = onebit.normalize(random_hpd(rng, 6)).matrix
        # independent forward map, written out per part
        fwd = (2 / np.pi) * (np.arcsin(Rbar.real) + 1j * np.arcsin(Rbar.imag))
        back = onebit.arcsine_recover(fwd).matrix
        assert np.max(np.abs(back - Rbar)) <= 1e-12


def test_end_to_end_recovery(rng):
    R = random_hpd(rng, 4)
    truth = onebit.normalize(R).matrix
    batch = onebit.draw_snapshots(R, 10**6, seed=5)
    est = onebit.arcsine_recover(onebit.sign_covariance(batch)).matrix
    assert np.max(np.abs(est - truth)) <= 1e-2
    # chunked streaming estimator gives the same estimate for the same seed
    streamed = onebit.estimate_normalized(R, 10**6, seed=5, chunk=10**6).matrix
    np.testing.assert_allclose(streamed, est, atol=1e-12)


def test_estimation_consistency(rng):
    R = random_hpd(rng, 8)
    truth = onebit.normalize(R).matrix
    wins = 0
    for t in range(100):
        e1 = np.max(np.abs(onebit.estimate_normalized(R, 10**4, seed=2 * t).matrix - truth))
        e4 = np.max(np.abs(onebit.estimate_normalized(R, 4 * 10**4, seed=2 * t + 1).matrix - truth))
        wins += e4 < e1
    assert wins >= 95


def test_normalize_examples():
    nc = onebit.normalize(np.array([[4, 2], [2, 4]], dtype=complex))
    np.testing.assert_allclose(nc.matrix, [[1, 0.5], [0.5, 1]])
    np.testing.assert_allclose(nc.scale, [2, 2])
    nc = onebit.normalize(3.0 * np.eye(3))
    np.testing.assert_allclose(nc.matrix, np.eye(3))
    np.testing.assert_allclose(nc.scale, np.sqrt(3.0))


def test_normalize_rejects_bad_diagonal():
    with pytest.raises(DomainError):
        onebit.normalize(np.diag([1.0, 0.0]))


def test_normalized_invariants(rng):
    nc = onebit.normalize(random_hpd(rng, 10, cond=1e4))
    M = nc.matrix
    assert np.all(M.diagonal() == 1)
    assert np.max(np.abs(M)) <= 1 + 1e-10
    assert np.max(np.abs(M - M.conj().T)) <= 1e-10


def test_normalize_round_trip(rng):
    for _ in range(20):
        R = random_hpd(rng, 8)
        nc = onebit.normalize(R)
        back = onebit.denormalize(nc, nc.scale)
        assert np.linalg.norm(back - R) <= 1e-12 * np.linalg.norm(R)


def test_denormalize_examples():
    Rbar = np.array([[1, 0.3j], [-0.3j, 1]])
    np.testing.assert_array_equal(onebit.denormalize(Rbar, np.ones(2)), Rbar)
    np.testing.assert_allclose(onebit.denormalize(np.eye(2), np.array([2.0, 3.0])), np.diag([4, 9]))


def test_denormalize_forms_agree(rng):
    for _ in range(50):
        n = int(rng.integers(1, 33))
        Rbar = onebit.normalize(random_hpd(rng, n)).matrix
        d = rng.uniform(0.1, 10, n)
        R = onebit.denormalize(Rbar, d, check=True)
        H = np.outer(d, d) * Rbar
        assert np.linalg.norm(R - H) <= 1e-14 * np.linalg.norm(H)


def test_denormalize_rejects():
    with pytest.raises(DomainError):
        onebit.denormalize(np.eye(2), np.array([1.0, -1.0]))
    with pytest.raises(DomainError):
        onebit.denormalize(np.eye(2), np.ones(3))
    assert issubclass(ConsistencyError, RuntimeError)


def test_nearest_correlation(rng):
    M = np.array([[1, 0.9, 0.9], [0.9, 1, -0.9], [0.9, -0.9, 1]], dtype=complex)
    P = onebit.nearest_correlation(M)
    assert np.linalg.eigvalsh(P)[0] > 0
    np.testing.assert_array_equal(P.diagonal(), 1)
    good = onebit.normalize(random_hpd(rng, 4)).matrix
    assert onebit.nearest_correlation(good) is good
