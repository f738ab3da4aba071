"""POVMs, experiment designs, Born-rule probabilities and the data sampler.

Outcomes are flattened POVM-major: all outcomes of POVM 0, then POVM 1, and
so on. That single ordering is used for the rows of the design matrix, the
offset vector, probability vectors and frequency vectors.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .bloch import PAULI, GeneratorBasis, is_physical, pauli_basis, to_bloch
from .errors import (
    DimensionMismatch,
    InvalidEfficiency,
    NotInformationallyComplete,
    UnphysicalState,
)
from .numerics import check_hermitian, eigh, eigvalsh, extreme_singular_values

POVM_TOL = 1e-10
IC_RTOL = 1e-10
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class Povm:
    dim: int
    effects: np.ndarray  # shape (M, d, d)
    name: str = ""

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=np.complex128)
        if eff.ndim != 3 or eff.shape[1:] != (self.dim, self.dim):
            raise DimensionMismatch(f"effects have shape {eff.shape}, expected (M, {self.dim}, {self.dim})")
        for e in eff:
            check_hermitian(e, atol=POVM_TOL)
            if eff.size and eigvalsh(e)[-1] < -POVM_TOL:
                raise ValueError(f"POVM {self.name!r} has a non-PSD effect")
        if np.linalg.norm(eff.sum(axis=0) - np.eye(self.dim)) > POVM_TOL:
            raise ValueError(f"POVM {self.name!r} effects do not sum to the identity")
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)

    @property
    def n_outcomes(self):
        return self.effects.shape[0]


_AXES = {"x": 1, "y": 2, "z": 3}


def _check_eta(eta):
    if not (0.0 <= eta <= 1.0) or not np.isfinite(eta):
        raise InvalidEfficiency(f"detection efficiency must lie in [0, 1], got {eta}")


def _loss_effects(axis, eta):
    sigma = PAULI[_AXES[axis]]
    eye = PAULI[0]
    return [0.5 * eta * (eye + sigma), 0.5 * eta * (eye - sigma), (1.0 - eta) * eye]


def pauli_loss_povm(axis, eta):
    """Single-qubit Pauli measurement with detection efficiency ``eta``.

    Outcomes are (+1, -1, no detection). At ``eta == 1`` the no-detection
    effect is the zero matrix and is kept as an explicit outcome.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    _check_eta(eta)
    return Povm(2, np.array(_loss_effects(axis, eta)), name=axis)


class ExperimentDesign:
    """A set of POVMs, how often each is measured, and the derived matrices.

    Attributes:
        povms: the J measurements.
        counts: repetitions n^(j) per POVM.
        basis: generator basis used to parametrise states and effects.
        a0: offsets Tr[Pi]/d, one per flattened outcome.
        A: design matrix, ``A[(j,m), a] = Tr[Pi^(j)_m lambda_a] / 2``.
        A_left_inv: left inverse of ``A`` (``None`` if the design is not IC).
        N: total number of trials.
        r: ``N / n^(j)`` as floats.
        weighting: ``"none"`` for the ordinary least-squares left inverse
            ``(A^T A)^-1 A^T``; ``"trace"`` for ``(A^T W A)^-1 A^T W`` with
            ``W = diag(1/Tr[Pi])`` (zero effects get weight 0). The two agree
            whenever every non-zero effect has the same trace.
    """

    def __init__(self, povms, counts, basis: GeneratorBasis, weighting="none", label=None):
        if len(povms) == 0:
            raise ValueError("a design needs at least one POVM")
        if len(counts) != len(povms):
            raise DimensionMismatch("counts and povms must have the same length")
        if weighting not in ("none", "trace"):
            raise ValueError(f"unknown weighting {weighting!r}")
        for p in povms:
            if p.dim != basis.dim:
                raise DimensionMismatch(f"POVM {p.name!r} has dim {p.dim}, basis has {basis.dim}")
        counts = np.asarray(counts, dtype=np.int64)
        if np.any(counts <= 0):
            raise ValueError("every POVM must be measured a positive number of times")
        self.povms = tuple(povms)
        self.counts = counts
        self.basis = basis
        self.weighting = weighting
        self.label = label
        self.dim = basis.dim
        self.qubits = None
        self.eta = None

        effects = np.concatenate([p.effects for p in povms], axis=0)
        sizes = [p.n_outcomes for p in povms]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.povm_index = np.repeat(np.arange(len(povms)), sizes)
        self.outcome_index = np.concatenate([np.arange(s) for s in sizes])

        self.a0 = np.einsum("rii->r", effects).real / self.dim
        self.A = 0.5 * np.einsum("rij,aji->ra", effects, basis.matrices).real
        self.N = int(counts.sum())
        self.r = self.N / counts.astype(np.float64)
        self.traces = self.dim * self.a0

        self.sigma_max, self.sigma_min = extreme_singular_values(self.A)
        self.informationally_complete = bool(self.sigma_max > 0 and self.sigma_min > IC_RTOL * self.sigma_max)
        self.A_left_inv = self.left_inverse(weighting) if self.informationally_complete else None
        for arr in (self.counts, self.a0, self.A, self.r, self.offsets, self.traces):
            arr.setflags(write=False)
        if self.A_left_inv is not None:
            self.A_left_inv.setflags(write=False)

    @property
    def n_povms(self):
        return len(self.povms)

    @property
    def n_outcomes(self):
        return int(self.offsets[-1])

    def outcome_weights(self, weighting):
        if weighting == "none":
            return np.ones(self.n_outcomes)
        tr = self.traces
        nonzero = tr > POVM_TOL
        w = np.zeros_like(tr)
        w[nonzero] = 1.0 / tr[nonzero]
        return w

    def left_inverse(self, weighting=None):
        """``(A^T W A)^-1 A^T W`` computed through an eigendecomposition."""
        if not self.informationally_complete:
            raise NotInformationallyComplete("design matrix is rank deficient")
        w = self.outcome_weights(self.weighting if weighting is None else weighting)
        aw = self.A * w[:, None]
        gram = aw.T @ self.A
        gram = 0.5 * (gram + gram.T)
        evals, evecs = eigh(gram)
        evecs = evecs.real
        gram_inv = (evecs / evals) @ evecs.T
        return gram_inv @ aw.T

    def require_ic(self):
        if not self.informationally_complete:
            raise NotInformationallyComplete(
                f"design is not informationally complete (sigma_min/sigma_max = "
                f"{self.sigma_min / self.sigma_max if self.sigma_max else 0.0:.3e})"
            )

    def with_counts(self, counts):
        """Same POVMs measured a different number of times."""
        new = ExperimentDesign(self.povms, counts, self.basis, self.weighting, self.label)
        new.qubits, new.eta = self.qubits, self.eta
        return new

    def split(self, vec):
        """Split a flattened outcome vector into per-POVM pieces."""
        return [vec[self.offsets[j] : self.offsets[j + 1]] for j in range(self.n_povms)]


def is_informationally_complete(design):
    return design.informationally_complete


def _tensor_povm(axes, eta):
    singles = [_loss_effects(a, eta) for a in axes]
    effects = []
    for combo in itertools.product(*singles):
        e = np.ones((1, 1), dtype=np.complex128)
        for factor in combo:
            e = np.kron(e, factor)
        effects.append(e)
    return Povm(2 ** len(axes), np.array(effects), name="".join(axes))


def pauli_design(k, eta, n_per_setting, weighting="trace"):
    """All 3^k tensor products of lossy single-qubit Pauli measurements.

    Outcomes of each POVM enumerate (+1, -1, 0)^k lexicographically, the
    first qubit being the most significant. The default ``"trace"``
    weighting reproduces the closed-form coefficients for lossy Pauli
    tomography; it coincides with ordinary least squares at ``eta == 1``.
    """
    if k < 1:
        raise ValueError(f"need at least one qubit, got k={k}")
    _check_eta(eta)
    if n_per_setting < 1:
        raise ValueError("n_per_setting must be positive")
    povms = [_tensor_povm(axes, eta) for axes in itertools.product("xyz", repeat=k)]
    design = ExperimentDesign(
        povms, [n_per_setting] * len(povms), pauli_basis(k), weighting=weighting, label="pauli"
    )
    design.qubits = k
    design.eta = float(eta)
    return design


def born_probabilities(design, s):
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (design.basis.size,):
        raise DimensionMismatch(f"Bloch vector has shape {s.shape}, expected ({design.basis.size},)")
    return design.a0 + design.A @ s


@dataclass(frozen=True, eq=False)
class FrequencyVector:
    """Observed counts and relative frequencies, flattened POVM-major."""

    counts: Optional[np.ndarray]
    frequencies: np.ndarray

    @classmethod
    def from_counts(cls, design, counts):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (design.n_outcomes,):
            raise DimensionMismatch(f"expected {design.n_outcomes} counts, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        totals = np.add.reduceat(counts, design.offsets[:-1])
        if not np.array_equal(totals, design.counts):
            raise ValueError(f"per-POVM count totals {totals.tolist()} do not match the design")
        freqs = counts / np.repeat(design.counts, np.diff(design.offsets)).astype(np.float64)
        return cls(counts, freqs)

    @classmethod
    def from_frequencies(cls, design, freqs):
        freqs = np.asarray(freqs, dtype=np.float64)
        if freqs.shape != (design.n_outcomes,):
            raise DimensionMismatch(f"expected {design.n_outcomes} frequencies, got {freqs.shape}")
        return cls(None, freqs)


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def substream(seed, j):
    """Generator for POVM ``j``: Philox4x64 keyed by ``seed XOR splitmix64(j)``.

    Philox is counter based, so the stream depends only on the key and is
    identical on every platform numpy supports.
    """
    key = (int(seed) & _MASK64) ^ _splitmix64(int(j))
    return np.random.Generator(np.random.Philox(key=key))


def _cdf(p):
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    last = np.nonzero(p > 0.0)[0][-1]
    cdf[last:] = 1.0
    return cdf


def sample_counts(design, probs, seed):
    """Inverse-CDF sampling of ``n^(j)`` outcomes per POVM from ``probs``."""
    out = np.empty(design.n_outcomes, dtype=np.int64)
    for j in range(design.n_povms):
        lo, hi = design.offsets[j], design.offsets[j + 1]
        u = substream(seed, j).random(int(design.counts[j]))
        out[lo:hi] = _kernels.count_outcomes(_cdf(probs[lo:hi]), u)
    return out


def sample(design, rho, seed):
    """Simulate the experiment on state ``rho``; deterministic in ``seed``."""
    if not is_physical(rho):
        raise UnphysicalState("cannot sample from a state that is not a density matrix")
    probs = born_probabilities(design, to_bloch(rho, design.basis))
    return FrequencyVector.from_counts(design, sample_counts(design, probs, seed))
