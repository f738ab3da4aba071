"""Small dense linear algebra used throughout the package.

Dimensions are tiny (d <= 16 for four qubits, Gram matrices up to 255x255),
so everything here favours verifiability over raw speed. The heavy loops
live in :mod:`tomocert._kernels`.
"""

from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import NonHermitianInput

HERMITIAN_ATOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_hermitian(m, atol=HERMITIAN_ATOL):
    """Return ``m`` as a complex square array, raising if it is not Hermitian."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonHermitianInput("matrix has non-finite entries")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > atol:
        raise NonHermitianInput(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")
    return m


def eigh(m, atol=HERMITIAN_ATOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Args:
        m: square complex (or real) Hermitian matrix.
        atol: entrywise tolerance for the Hermiticity check.

    Returns:
        EigenDecomposition with eigenvalues sorted descending.

    Raises:
        NonHermitianInput: if ``m`` deviates from its conjugate transpose by
            more than ``atol`` anywhere.
    """
    m = check_hermitian(m, atol)
    # Symmetrise so tiny input asymmetry cannot leak into the rotations.
    m = np.ascontiguousarray(0.5 * (m + m.conj().T))
    w, v, _ = _kernels.jacobi_eigh(m)
    return EigenDecomposition(w, v)


def eigvalsh(m, atol=HERMITIAN_ATOL):
    return eigh(m, atol).eigenvalues


def extreme_singular_values(a):
    """Largest and smallest singular values of a real tall matrix.

    Computed from the eigenvalues of ``a.T @ a``; the smallest may be zero.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    w = eigvalsh(a.T @ a)
    w = np.clip(w, 0.0, None)
    return float(np.sqrt(w[0])), float(np.sqrt(w[-1]))


def project_simplex(v):
    """Nearest point (Euclidean) on the probability simplex.

    Points already on the simplex, to within a few ulps of the sum, are
    returned unchanged, which makes the projection exactly idempotent.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex expects a non-empty 1-d vector")
    return _kernels.project_simplex(v)


def matrix_function(m, func):
    """Apply ``func`` to the eigenvalues of Hermitian ``m``."""
    w, v = eigh(m)
    return (v * func(w)) @ v.conj().T
