import numpy as np
import pytest

from polqpt.qstate import PAULI


def random_kraus(rng, n_ops=3):
    """Trace-preserving Kraus set cut from a random isometry."""
    g = rng.normal(size=(2 * n_ops, 2)) + 1j * rng.normal(size=(2 * n_ops, 2))
    q, _ = np.linalg.qr(g)
    return [q[2 * k:2 * k + 2] for k in range(n_ops)]


def random_unitary(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, dim=2, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_ball_point(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform() ** (1 / 3)


def brute_force_chi(channel):
    """chi from the images of the matrix units ``|i><j|``, by direct linear solve.

    Independent of the coefficient-expansion route: builds the 16x16 system
    ``E(|i><j|) = sum_mn chi_mn E_m |i><j| E_n^dag`` and solves it.
    """
    units = [np.outer(np.eye(2)[i], np.eye(2)[j]) for i in range(2) for j in range(2)]
    rows, rhs = [], []
    for u in units:
        image = channel(u)
        basis = np.array([[(PAULI[m] @ u @ PAULI[n].conj().T).reshape(-1) for n in range(4)] for m in range(4)])
        rows.append(basis.reshape(16, 4).T)  # 4 entries x 16 unknowns
        rhs.append(image.reshape(-1))
    a = np.vstack(rows)
    sol = np.linalg.lstsq(a, np.concatenate(rhs), rcond=None)[0]
    return sol.reshape(4, 4)


def kraus_channel(kraus):
    return lambda rho: sum(k @ rho @ k.conj().T for k in kraus)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
