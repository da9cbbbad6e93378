"""Small dense Hermitian linear algebra on one- and two-qubit operators.

NumPy only. Conventions:
  * operators are complex ndarrays of shape (2, 2) or (4, 4), row-major;
  * pure states are complex ndarrays of shape (dim,), unit norm;
  * two-qubit tensor index order is (Alice, Bob), so tensor(A, B) = kron(A, B);
  * eigenpairs are returned with eigenvalues sorted in descending order and
    eigenvectors as the matching columns of a unitary matrix.
"""

from __future__ import annotations

import math

import numpy as np

from .config import TOLS

Array = np.ndarray

SQRT2 = math.sqrt(2.0)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_IDENTITY = np.eye(2, dtype=complex)

# Diagonal directions of the z-x Bloch plane, used by every measurement model here.
_SIGMA_H = (_SIGMA_Z + _SIGMA_X) / SQRT2
_SIGMA_M = (_SIGMA_Z - _SIGMA_X) / SQRT2

_PAULI = {
    "x": _SIGMA_X,
    "y": _SIGMA_Y,
    "z": _SIGMA_Z,
    "h": _SIGMA_H,
    "m": _SIGMA_M,
    "identity": _IDENTITY,
}


def pauli(name: str) -> Array:
    """Return a fresh copy of a named Pauli-frame operator.

    Recognized names: "x", "y", "z", "h", "m", "identity", where h and m are
    the unit operators along the two diagonals of the z-x plane,
    h = (z + x)/sqrt(2) and m = (z - x)/sqrt(2).
    """
    try:
        return _PAULI[name].copy()
    except KeyError:
        raise ValueError(f"unknown operator name {name!r}") from None


def tensor(a: Array, b: Array) -> Array:
    """Kronecker product of two single-qubit operators, Alice factor first."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor expects two 2x2 operators, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def phi_plus() -> Array:
    """The maximally entangled target state (|00> + |11>)/sqrt(2)."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / SQRT2
    return psi


def is_hermitian(m: Array, tol: float = TOLS.hermitian) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max() <= tol


def require_hermitian(m: Array, tol: float = TOLS.hermitian, what: str = "operator") -> Array:
    """Validate Hermiticity and return the exactly symmetrized matrix."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise ValueError(f"{what} is not Hermitian within {tol:g}")
    return 0.5 * (m + m.conj().T)


def check_density_matrix(rho: Array, *, what: str = "state") -> Array:
    """Validate trace one and positivity; returns the symmetrized matrix."""
    rho = require_hermitian(rho, what=what)
    tr = rho.trace().real
    if abs(tr - 1.0) > TOLS.trace:
        raise ValueError(f"{what} has trace {tr:.12g}, expected 1")
    smallest = np.linalg.eigvalsh(rho)[0]
    if smallest < -TOLS.psd:
        raise ValueError(f"{what} has negative eigenvalue {smallest:.3e}")
    return rho


def check_pure_state(psi: Array, *, what: str = "state vector") -> Array:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"{what} must be a vector")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > TOLS.unit_norm:
        raise ValueError(f"{what} has norm {norm:.12g}, expected 1")
    return psi


def eig_hermitian(m: Array) -> tuple[Array, Array]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (values, vectors) with vectors[:, k] the unit eigenvector for
    values[k]. Degenerate clusters get an arbitrary orthonormal basis.
    """
    m = require_hermitian(m)
    values, vectors = np.linalg.eigh(m)
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def fidelity_with_pure(rho: Array, psi: Array) -> float:
    """<psi| rho |psi>, clamped to [0, 1].

    For a pure target the Uhlmann fidelity reduces to this overlap; the clamp
    absorbs roundoff up to the configured tolerance only.
    """
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    value = float(np.real(psi.conj() @ rho @ psi))
    if value < -TOLS.fidelity_clamp or value > 1.0 + TOLS.fidelity_clamp:
        raise ValueError(f"overlap {value:.12g} is outside [0, 1] beyond tolerance")
    return min(1.0, max(0.0, value))
