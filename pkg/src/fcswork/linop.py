"""Dense operator algebra and column-stacking superoperators.

All superoperators act on ``vec(rho)``, the column-stacked density matrix,
so that ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# (sigma_x - i sigma_y) / 2 with sigma_z = diag(1, -1): maps index 0 (upper level) to index 1
SIGMA_LOWER = (SIGMA_X - 1j * SIGMA_Y) / 2


def _square(a, name="operator"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def dag(a):
    return np.asarray(a).conj().T


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, rtol=0, atol=tol)


def kron(*ops):
    """Tensor product of square operators, first factor is the slowest index."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    return reduce(np.kron, (_square(op) for op in ops))


def vectorize(rho):
    return _square(rho, "density matrix").reshape(-1, order="F")


def devectorize(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[-1])))
    if dim * dim != v.shape[-1]:
        raise ValueError(f"vector of length {v.shape[-1]} is not a vectorized {dim}x{dim} matrix")
    # batched vectors keep their leading axes
    return np.swapaxes(v.reshape(v.shape[:-1] + (dim, dim)), -1, -2)


def sandwich_superop(a, b):
    """Superoperator of ``rho -> a @ rho @ b``."""
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.kron(b.T, a)


def left_superop(a):
    a = _square(a)
    return np.kron(np.eye(a.shape[0]), a)


def right_superop(b):
    b = _square(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def commutator_superop(h):
    """Superoperator of ``rho -> h @ rho - rho @ h``."""
    return left_superop(h) - right_superop(h)


def anticommutator_superop(h):
    return left_superop(h) + right_superop(h)


def identity_covector(dim):
    """``vec(I)``; contracting with it gives the trace of the devectorized matrix."""
    return vectorize(np.eye(dim, dtype=complex))


def hermitian_exponential_factor(h, z, check=True):
    """``exp(z * h)`` for Hermitian ``h`` via its eigendecomposition.

    ``z`` may be any complex number, so both ``exp(i u H)`` and the Boltzmann
    weight ``exp(-beta H)`` come out of the same routine.
    """
    h = _square(h, "Hamiltonian")
    if check and not is_hermitian(h):
        raise ValueError("hermitian_exponential_factor needs a Hermitian matrix")
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(z * evals)) @ evecs.conj().T
