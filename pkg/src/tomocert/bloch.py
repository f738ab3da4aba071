"""Generator bases and the density matrix <-> Bloch vector bijection.

A state on a d-dimensional space is written as

    rho(s) = I/d + (1/2) * sum_a s_a * lambda_a,

where the ``lambda_a`` are d^2 - 1 traceless Hermitian matrices with
Tr[lambda_a lambda_b] = 2 delta_ab, so that s_a = Tr[rho lambda_a].
Matrices and vectors are plain numpy arrays throughout.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, UnsupportedDimension
from .numerics import check_hermitian, eigvalsh

PHYSICAL_TOL = 1e-9

PAULI = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """An orthogonal traceless operator basis.

    ``kind`` is ``"gellmann"`` or ``"pauli"``; ``qubits`` is set for the
    latter. ``labels`` names each generator (Pauli strings such as ``"XI"``
    for the tensor basis, ``"S01"``/``"A01"``/``"D1"`` for Gell-Mann).
    """

    dim: int
    kind: str
    matrices: np.ndarray
    labels: tuple
    qubits: Optional[int] = None

    @property
    def size(self):
        return self.dim * self.dim - 1

    def spec(self):
        if self.kind == "pauli":
            return {"kind": "pauli", "qubits": self.qubits}
        return {"kind": "gellmann", "dim": self.dim}


def gell_mann_basis(d):
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    sym, anti, diag = [], [], []
    sym_lab, anti_lab, diag_lab = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = m[k, j] = 1.0
            sym.append(m)
            sym_lab.append(f"S{j}{k}")
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = -1j
            m[k, j] = 1j
            anti.append(m)
            anti_lab.append(f"A{j}{k}")
    for l in range(1, d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -l
        diag.append(np.sqrt(2.0 / (l * (l + 1))) * m)
        diag_lab.append(f"D{l}")
    mats = np.array(sym + anti + diag)
    mats.setflags(write=False)
    return GeneratorBasis(d, "gellmann", mats, tuple(sym_lab + anti_lab + diag_lab))


def pauli_basis(k):
    """Normalised k-qubit Pauli strings, identity string excluded.

    Each generator is (1/sqrt(2^(k-1))) * sigma_b1 x ... x sigma_bk with the
    multi-index ordered lexicographically over {0,1,2,3}^k.
    """
    if k < 1:
        raise UnsupportedDimension(f"need at least one qubit, got k={k}")
    norm = 1.0 / np.sqrt(2.0 ** (k - 1))
    mats, labels = [], []
    for beta in itertools.product(range(4), repeat=k):
        if not any(beta):
            continue
        m = np.ones((1, 1), dtype=np.complex128)
        for b in beta:
            m = np.kron(m, PAULI[b])
        mats.append(norm * m)
        labels.append("".join("IXYZ"[b] for b in beta))
    mats = np.array(mats)
    mats.setflags(write=False)
    return GeneratorBasis(2**k, "pauli", mats, tuple(labels), qubits=k)


def make_basis(kind, n):
    """Build a basis: ``make_basis("pauli", k)`` or ``make_basis("gellmann", d)``."""
    if kind == "pauli":
        return pauli_basis(n)
    if kind == "gellmann":
        return gell_mann_basis(n)
    raise ValueError(f"unknown basis kind {kind!r}")


def basis_from_spec(spec):
    if spec["kind"] == "pauli":
        return pauli_basis(int(spec["qubits"]))
    return gell_mann_basis(int(spec["dim"]))


def pauli_weight(label):
    """Number of non-identity factors in a Pauli-string label."""
    return sum(ch != "I" for ch in label)


def to_bloch(rho, basis):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"state has shape {rho.shape}, basis has dim {basis.dim}")
    # Tr[rho lam] = sum_ij rho_ij lam_ji
    return np.einsum("ij,aji->a", rho, basis.matrices).real.copy()


def from_bloch(s, basis):
    """Trace-one Hermitian matrix for Bloch vector ``s``; not necessarily PSD."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (basis.size,):
        raise DimensionMismatch(f"Bloch vector has shape {s.shape}, expected ({basis.size},)")
    m = np.eye(basis.dim, dtype=np.complex128) / basis.dim
    m += 0.5 * np.einsum("a,aij->ij", s, basis.matrices)
    return m


def is_physical(m, tol=PHYSICAL_TOL):
    """True iff ``m`` is Hermitian, trace-one and has no eigenvalue below -tol."""
    try:
        m = check_hermitian(m, atol=max(tol, 1e-12))
    except NonHermitianInput:
        return False
    if abs(np.trace(m).real - 1.0) > tol:
        return False
    return bool(eigvalsh(m)[-1] >= -tol)


# ---------------------------------------------------------------------------
# state constructors


def maximally_mixed(d):
    return np.eye(d, dtype=np.complex128) / d


def pure_state(psi):
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def zero_state(k):
    psi = np.zeros(2**k)
    psi[0] = 1.0
    return pure_state(psi)


def ghz_state(k):
    psi = np.zeros(2**k)
    psi[0] = psi[-1] = 1.0
    return pure_state(psi)


def preset_state(name, k):
    """Named presets used by the CLI and the validation grid."""
    if name == "mixed":
        return maximally_mixed(2**k)
    if name == "zero":
        return zero_state(k)
    if name == "ghz":
        return ghz_state(k)
    raise ValueError(f"unknown state preset {name!r}; choose mixed, zero or ghz")


def random_density_matrix(d, rng, rank=None):
    """G G^H / Tr[G G^H] for a complex Gaussian d x rank matrix G."""
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(d, rng):
    return random_density_matrix(d, rng, rank=1)
