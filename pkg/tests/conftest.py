import numpy as np
import pytest


def random_hpd(rng, n, cond=10.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(A)
    ev = np.exp(rng.uniform(0.0, np.log(cond), n))
    return (Q * ev) @ Q.conj().T


def unimodular(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def shift_matrix(n, k):
    """Explicit J_k: ones on the k-th subdiagonal (k < 0: superdiagonal)."""
    return np.eye(n, k=-k)


def brute_clutter(x):
    n = len(x)
    out = np.zeros((n, n), dtype=complex)
    for k in range(-(n - 1), n):
        if k:
            v = shift_matrix(n, k) @ x
            out += np.outer(v, v.conj())
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
