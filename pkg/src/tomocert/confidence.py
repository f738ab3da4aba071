"""Finite-sample confidence levels for the ENM and CLS estimators.

For an informationally complete design the estimate lies within ``delta``
of the true state (in the chosen loss) with probability at least

    CL = 1 - 2 * sum_a exp(-(b / c_a) * delta^2 * N),

where ``b`` depends only on the loss and the dimension and ``c_a`` only on
the measurement design. The bound is a union of per-coordinate Hoeffding
tails and so already covers estimates that reuse the same data.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidEfficiency, InvalidLoss, InvalidTarget, InvalidThreshold
from .loss import LossKind


def b_constant(loss, d):
    loss = LossKind.parse(loss)
    if loss is LossKind.HILBERT_SCHMIDT:
        return 8.0 / (d * d - 1)
    if loss is LossKind.TRACE:
        return 16.0 / (d * (d * d - 1))
    return 4.0 / (d * (d * d - 1))


def c_alpha(design):
    """Per-generator coefficients from the ranges of the left inverse rows.

    ``c_a = sum_j r_j * (max_m L[a,(j,m)] - min_m L[a,(j,m)])^2`` with the
    max/min running over every outcome of POVM j, zero effects included.
    """
    design.require_ic()
    L = design.A_left_inv
    c = np.zeros(L.shape[0])
    for j in range(design.n_povms):
        block = L[:, design.offsets[j] : design.offsets[j + 1]]
        c += design.r[j] * (block.max(axis=1) - block.min(axis=1)) ** 2
    return c


@dataclass
class ErrorBudget:
    """User-supplied systematic (xi) and numerical (zeta) error sizes."""

    xi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        for name in ("xi", "zeta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")

    @property
    def total(self):
        return self.xi + self.zeta


@dataclass
class ConfidenceReport:
    loss: LossKind
    delta: float
    N: int
    b: float
    c: np.ndarray
    cl: float
    per_alpha_terms: np.ndarray
    estimator: str = "enm"
    rate_factor: float = 1.0
    budget: Optional[ErrorBudget] = None
    extra: dict = field(default_factory=dict)

    @property
    def cl_clamped(self):
        return max(self.cl, 0.0)

    def to_dict(self):
        out = {
            "estimator": self.estimator,
            "loss": self.loss.value,
            "delta": self.delta,
            "N": self.N,
            "b": self.b,
            "c": self.c.tolist(),
            "rate_factor": self.rate_factor,
            "per_alpha_terms": self.per_alpha_terms.tolist(),
            "cl": self.cl,
            "cl_clamped": self.cl_clamped,
        }
        if self.budget is not None:
            out["budget"] = asdict(self.budget)
        out.update(self.extra)
        return out


def _check_delta(delta):
    if not (delta > 0) or not math.isfinite(delta):
        raise InvalidThreshold(f"error threshold must be positive and finite, got {delta}")


def _report(design, loss, delta, N, factor, estimator):
    _check_delta(delta)
    loss = LossKind.parse(loss)
    N = design.N if N is None else int(N)
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    c = c_alpha(design)
    b = b_constant(loss, design.dim)
    terms = 2.0 * np.exp(-factor * (b / c) * delta * delta * N)
    cl = 1.0 - float(np.sum(terms))
    return ConfidenceReport(loss, float(delta), N, b, c, cl, terms, estimator, factor)


def confidence_level(design, loss, delta, N=None):
    """Confidence level of the ENM estimate at threshold ``delta``.

    ``N`` defaults to the design's total. Passing a different ``N`` treats
    the design as rescaled with the same per-POVM fractions, which leaves
    the ``c_a`` unchanged.
    """
    return _report(design, loss, delta, N, 1.0, "enm")


def cls_confidence_level(design, loss, delta, N=None):
    """As :func:`confidence_level` with the exponent scaled by (s_min/s_max)^2."""
    design.require_ic()
    factor = (design.sigma_min / design.sigma_max) ** 2
    return _report(design, loss, delta, N, factor, "cls")


def closed_form_terms(k, eta, loss):
    """(multiplicity, rate) pairs for lossy Pauli tomography on ``k`` qubits.

    Group ``l`` (generators with ``l`` identity factors) contributes
    ``2 * 3^(k-l) * C(k,l) * exp(-rate * delta^2 * N)`` with
    ``rate = b * 2^(k-3) * eta^(2(k-l)) / 3^(k-l)``.
    """
    if not (0.0 < eta <= 1.0):
        raise InvalidEfficiency(f"detection efficiency must lie in (0, 1], got {eta}")
    b = b_constant(loss, 2**k)
    return [
        (2 * 3 ** (k - l) * math.comb(k, l), b * 2.0 ** (k - 3) * eta ** (2 * (k - l)) / 3 ** (k - l))
        for l in range(k)
    ]


def closed_form_failure(k, eta, delta, N, loss=LossKind.TRACE):
    """``1 - closed_form_cl_k``, summed directly to keep precision near CL = 1."""
    _check_delta(delta)
    return sum(mult * math.exp(-rate * delta * delta * N) for mult, rate in closed_form_terms(k, eta, loss))


def closed_form_cl_k(k, eta, delta, N, loss=LossKind.TRACE):
    return 1.0 - closed_form_failure(k, eta, delta, N, loss)


def required_samples(k, eta, delta, loss, target_cl):
    """Smallest N with ``closed_form_cl_k(...) >= target_cl``, by bisection."""
    if not (0.0 < target_cl < 1.0):
        raise InvalidTarget(f"target confidence level must lie in (0, 1), got {target_cl}")
    _check_delta(delta)

    def ok(n):
        return closed_form_cl_k(k, eta, delta, n, loss) >= target_cl

    hi = 1
    while not ok(hi):
        hi *= 2
    lo = hi // 2  # ok(lo) is False unless hi == 1
    if hi == 1:
        return 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def preparation_bound(delta_target_est, delta, loss=LossKind.TRACE, budget=None):
    """Upper bound on the distance between target and prepared state.

    ``delta_target_est`` is the computed distance from the target to the
    estimate. The bound holds at the confidence level for ``delta``.
    """
    loss = LossKind.parse(loss)
    if loss is LossKind.INFIDELITY:
        raise InvalidLoss("infidelity is not a distance; use infidelity_preparation_bound")
    if delta_target_est < 0:
        raise ValueError("distance to the estimate must be non-negative")
    _check_delta(delta)
    budget = budget or ErrorBudget()
    return delta_target_est + budget.xi + budget.zeta + delta


def infidelity_preparation_bound(trace_dist_target_est, delta, budget=None):
    """(infidelity upper bound, fidelity lower bound) from a trace-distance threshold.

    Valid at the trace-distance confidence level.
    """
    budget = budget or ErrorBudget()
    if trace_dist_target_est < 0 or delta < 0:
        raise ValueError("inputs must be non-negative")
    inf = 2.0 * (trace_dist_target_est + budget.xi + budget.zeta + delta)
    return inf, 1.0 - inf


def figure2_curves(
    ks=(1, 2), etas=(1.0, 0.9, 0.8), delta=0.07, n_values=None, points=60, n_max=None, loss=LossKind.TRACE
):
    """Rows (k, eta, N, n_per_setting, cl, one_minus_cl) of closed-form curves.

    Without ``n_values`` the N grid is log-spaced up to the point where
    ``1 - CL`` for the worst efficiency falls below 1e-6, with each N a
    multiple of 3^k.
    """
    rows = []
    for k in ks:
        settings = 3**k
        if n_values is not None:
            grid = sorted(set(int(n) for n in n_values))
        else:
            top = n_max or required_samples(k, min(etas), delta, loss, 1 - 1e-6)
            raw = np.geomspace(settings, top, points)
            grid = sorted(set(int(settings * max(1, math.ceil(n / settings))) for n in raw))
        for eta in etas:
            for N in grid:
                fail = closed_form_failure(k, eta, delta, N, loss)
                rows.append(
                    {
                        "k": k,
                        "eta": eta,
                        "N": N,
                        "n_per_setting": N / settings,
                        "cl": 1.0 - fail,
                        "one_minus_cl": fail,
                    }
                )
    return rows
