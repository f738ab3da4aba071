"""Loss functions between states: Hilbert-Schmidt, trace distance, infidelity."""

import enum

import numpy as np

from .errors import DimensionMismatch, UnphysicalInput
from .numerics import check_hermitian, eigh, eigvalsh

PSD_TOL = 1e-10
# eigenvalues this small are round-off on a rank-deficient state; taking
# their square root would inject errors of order 1e-8 into the fidelity
RANK_TOL = 1e-13


class LossKind(str, enum.Enum):
    HILBERT_SCHMIDT = "hs"
    TRACE = "trace"
    INFIDELITY = "infidelity"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown loss {value!r}; choose hs, trace or infidelity") from None


ALL_LOSSES = (LossKind.HILBERT_SCHMIDT, LossKind.TRACE, LossKind.INFIDELITY)


def _pair(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def hs_distance(a, b):
    """(1/sqrt 2) * ||a - b||_F."""
    a, b = _pair(a, b)
    return float(np.linalg.norm(a - b) / np.sqrt(2.0))


def trace_distance(a, b):
    """Half the sum of absolute eigenvalues of ``a - b``."""
    a, b = _pair(a, b)
    return float(0.5 * np.sum(np.abs(eigvalsh(a - b))))


def _psd_sqrt(m, name):
    w, v = eigh(m)
    if w[-1] < -PSD_TOL:
        raise UnphysicalInput(f"{name} has eigenvalue {w[-1]:.3e} below -{PSD_TOL}")
    w = np.sqrt(np.where(w > RANK_TOL, w, 0.0))
    return (v * w) @ v.conj().T


def fidelity(a, b):
    """Tr[sqrt(sqrt(a) b sqrt(a))]^2 for density matrices ``a`` and ``b``."""
    a, b = _pair(a, b)
    check_hermitian(a)
    check_hermitian(b)
    if eigvalsh(b)[-1] < -PSD_TOL:
        raise UnphysicalInput(f"second argument has eigenvalue below -{PSD_TOL}")
    ra = _psd_sqrt(a, "first argument")
    inner = ra @ b @ ra
    inner = 0.5 * (inner + inner.conj().T)
    w = eigvalsh(inner)
    w = np.where(w > RANK_TOL, w, 0.0)
    return float(np.sum(np.sqrt(w)) ** 2)


def infidelity(a, b):
    """1 - fidelity, clipped into [0, 1]."""
    return float(min(max(1.0 - fidelity(a, b), 0.0), 1.0))


def linf_distance(s1, s2):
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    if s1.shape != s2.shape:
        raise DimensionMismatch(f"shapes differ: {s1.shape} vs {s2.shape}")
    return float(np.max(np.abs(s1 - s2))) if s1.size else 0.0


_DISPATCH = {
    LossKind.HILBERT_SCHMIDT: hs_distance,
    LossKind.TRACE: trace_distance,
    LossKind.INFIDELITY: infidelity,
}


def loss(kind, a, b):
    """Evaluate the loss named by ``kind`` (a :class:`LossKind` or its string)."""
    return _DISPATCH[LossKind.parse(kind)](a, b)
