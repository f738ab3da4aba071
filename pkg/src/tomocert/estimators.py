"""Point estimators: linear inversion (LLS), its projection onto density
matrices (ENM), and constrained least squares (CLS)."""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bloch import from_bloch, to_bloch
from .measurement import FrequencyVector
from .numerics import check_hermitian, eigh, project_simplex


def _freqs(f):
    return f.frequencies if isinstance(f, FrequencyVector) else np.asarray(f, dtype=np.float64)


def lls_estimate(design, f):
    """Linear least-squares estimate ``s = A_L^-1 (f - a0)``.

    Returns the Bloch vector and the corresponding trace-one Hermitian
    matrix, which need not be positive semidefinite.

    Raises:
        NotInformationallyComplete: the design has no left inverse.
    """
    design.require_ic()
    s = design.A_left_inv @ (_freqs(f) - design.a0)
    return s, from_bloch(s, design.basis)


def project_density(m):
    """Frobenius-nearest density matrix to a trace-one Hermitian ``m``.

    The projection is unitarily invariant, so it reduces to projecting the
    eigenvalues onto the probability simplex.
    """
    m = check_hermitian(m)
    w, v = eigh(m)
    if w[-1] >= 0.0:
        return m.copy()
    p = project_simplex(w)
    out = (v * p) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def enm_estimate(rho_lls):
    """ENM estimate: the density matrix closest to ``rho_lls`` in Frobenius norm."""
    return project_density(rho_lls)


def project_bloch(s, basis):
    """Euclidean projection of ``s`` onto the Bloch vectors of valid states."""
    return to_bloch(project_density(from_bloch(s, basis)), basis)


def cls_objective(design, s, f):
    """``|| A s + a0 - f ||_2``, the probability-space residual."""
    return float(np.linalg.norm(design.A @ s + design.a0 - _freqs(f)))


class CLSResult(NamedTuple):
    rho: np.ndarray
    iterations: int
    residual: float
    converged: bool


def cls_estimate(design, f, max_iters=10000, tol=1e-10, s0=None):
    """Constrained least squares by projected gradient with step 1/L.

    Minimises ``||A s + a0 - f||^2`` over physical Bloch vectors, starting
    from the ENM estimate unless ``s0`` is given. Stops once the sup-norm
    change of the iterate drops to ``tol`` or after ``max_iters`` steps;
    hitting the cap sets ``converged=False`` rather than raising.
    """
    design.require_ic()
    freqs = _freqs(f)
    basis = design.basis
    A = design.A
    if s0 is None:
        _, rho_lls = lls_estimate(design, freqs)
        s0 = to_bloch(enm_estimate(rho_lls), basis)
    step = 1.0 / (2.0 * design.sigma_max**2)
    resid0 = freqs - design.a0
    s = np.asarray(s0, dtype=np.float64)
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        grad = 2.0 * (A.T @ (A @ s - resid0))
        s_next = project_bloch(s - step * grad, basis)
        change = float(np.max(np.abs(s_next - s)))
        s = s_next
        if change <= tol:
            converged = True
            break
    rho = from_bloch(s, basis)
    return CLSResult(project_density(rho), it, cls_objective(design, s, freqs), converged)


@dataclass
class EstimateRecord:
    s_lls: np.ndarray
    rho_lls: np.ndarray
    s_enm: np.ndarray
    rho_enm: np.ndarray
    rho_cls: Optional[np.ndarray] = None
    s_cls: Optional[np.ndarray] = None
    cls_iterations: Optional[int] = None
    cls_residual: Optional[float] = None
    cls_converged: Optional[bool] = None
    # eigensolver reconstruction residual of the ENM step, reported as a
    # numerical-error indicator only
    enm_residual: float = 0.0


def estimate(design, f, cls=False, max_iters=10000, tol=1e-10):
    """Run LLS and ENM (and optionally CLS) on one dataset."""
    s_lls, rho_lls = lls_estimate(design, f)
    rho_enm = enm_estimate(rho_lls)
    s_enm = to_bloch(rho_enm, design.basis)
    w, v = eigh(rho_lls)
    rec = EstimateRecord(
        s_lls=s_lls,
        rho_lls=rho_lls,
        s_enm=s_enm,
        rho_enm=rho_enm,
        enm_residual=float(np.linalg.norm((v * w) @ v.conj().T - rho_lls)),
    )
    if cls:
        res = cls_estimate(design, f, max_iters=max_iters, tol=tol, s0=s_enm)
        rec.rho_cls = res.rho
        rec.s_cls = to_bloch(res.rho, design.basis)
        rec.cls_iterations = res.iterations
        rec.cls_residual = res.residual
        rec.cls_converged = res.converged
    return rec
