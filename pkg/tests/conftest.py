import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_pure_state(rng, dim=4):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_matrix(rng, dim=4, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim=2):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_qubit_kraus(rng, n_ops=2):
    """Random channel via a Stinespring isometry: n_ops Kraus operators."""
    a = rng.normal(size=(2 * n_ops, 2)) + 1j * rng.normal(size=(2 * n_ops, 2))
    q, _ = np.linalg.qr(a)
    return tuple(q[2 * i : 2 * i + 2, :] for i in range(n_ops))


def random_pullback_instance(rng):
    """Random channel-pullback fidelity minimization with an active constraint.

    The threshold sits strictly between the local bound and the operator
    maximum, so the score constraint is feasible and usually binding.
    """
    import math

    from gchsh import QubitChannel, SdpInstance, bell_operator, local_bound, pullback_objective

    theta = rng.uniform(math.pi / 64, math.pi / 4)
    a = rng.uniform(0, math.pi / 2)
    b = rng.uniform(0, math.pi / 2)
    ch_a = QubitChannel(kraus=random_qubit_kraus(rng, n_ops=int(rng.integers(1, 4))))
    ch_b = QubitChannel(kraus=random_qubit_kraus(rng, n_ops=int(rng.integers(1, 4))))
    op = bell_operator(theta, a, b)
    lam_max = float(np.linalg.eigvalsh(op)[-1])
    lo = min(local_bound(theta), lam_max - 1e-6)
    beta = lo + rng.uniform(0.15, 0.95) * (lam_max - lo)
    return SdpInstance(
        objective=pullback_objective(ch_a, ch_b),
        constraint_op=op,
        threshold=float(beta),
    )
