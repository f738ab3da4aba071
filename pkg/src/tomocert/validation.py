"""Monte Carlo check that certified confidence levels hold empirically.

Each trial draws a fresh dataset with seed ``base_seed + t``, so results do
not depend on how trials are scheduled across workers.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bloch import preset_state, to_bloch
from .confidence import c_alpha, confidence_level, required_samples
from .estimators import enm_estimate, lls_estimate
from .loss import ALL_LOSSES, LossKind, loss as loss_fn
from .measurement import FrequencyVector, born_probabilities, pauli_design, sample_counts

ENM_VS_LLS_SLACK = 1e-10


@dataclass
class TrialBatchResult:
    trials: int
    delta: float
    N: int
    failures_per_loss: dict
    bound_one_minus_cl: dict
    enm_vs_lls_violations: int = 0
    coord_failures: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    coord_bounds: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coord_delta: float = 0.0

    @property
    def empirical_error_rate(self):
        return {k: v / self.trials for k, v in self.failures_per_loss.items()}

    def sigma(self, loss):
        p = min(max(self.bound_one_minus_cl[loss], 0.0), 1.0)
        return math.sqrt(p * (1.0 - p) / self.trials)

    def flagged(self, loss):
        """Empirical failure rate above the certified bound plus 3 sigma."""
        bound = min(self.bound_one_minus_cl[loss], 1.0)
        return self.empirical_error_rate[loss] > bound + 3.0 * self.sigma(loss)

    def coord_flags(self):
        p = np.clip(self.coord_bounds, 0.0, 1.0)
        slack = 3.0 * np.sqrt(p * (1.0 - p) / self.trials)
        return self.coord_failures / self.trials > p + slack


def _run_trials(design, rho_true, delta, losses, seeds, coord_delta):
    s_true = to_bloch(rho_true, design.basis)
    probs = born_probabilities(design, s_true)
    fails = np.zeros(len(losses), dtype=np.int64)
    coord = np.zeros(design.basis.size, dtype=np.int64)
    violations = 0
    for seed in seeds:
        f = FrequencyVector.from_counts(design, sample_counts(design, probs, seed))
        s_lls, rho_lls = lls_estimate(design, f)
        rho_enm = enm_estimate(rho_lls)
        s_enm = to_bloch(rho_enm, design.basis)
        if np.linalg.norm(s_enm - s_true) > np.linalg.norm(s_lls - s_true) + ENM_VS_LLS_SLACK:
            violations += 1
        coord += np.abs(s_lls - s_true) > coord_delta
        for i, kind in enumerate(losses):
            if loss_fn(kind, rho_enm, rho_true) > delta:
                fails[i] += 1
    return fails, coord, violations


def _run_chunk(args):
    return _run_trials(*args)


def run_batch(design, rho_true, delta, losses=ALL_LOSSES, trials=1000, base_seed=0, workers=1, coord_delta=None):
    """Simulate ``trials`` experiments and count threshold violations.

    Args:
        design: informationally complete experiment design.
        rho_true: the state being measured.
        delta: error threshold applied to every loss in ``losses``.
        losses: loss kinds to check.
        trials: number of simulated datasets.
        base_seed: trial ``t`` uses seed ``base_seed + t``.
        workers: processes to fan trials out to; results are identical to
            the sequential run.
        coord_delta: threshold for the per-coordinate tail check on the
            linear estimate; defaults to ``delta``.
    """
    design.require_ic()
    if trials < 1:
        raise ValueError("trials must be at least 1")
    losses = tuple(LossKind.parse(k) for k in losses)
    coord_delta = delta if coord_delta is None else coord_delta
    seeds = [base_seed + t for t in range(trials)]
    if workers <= 1 or trials < 2 * workers:
        fails, coord, violations = _run_trials(design, rho_true, delta, losses, seeds, coord_delta)
    else:
        chunks = [seeds[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(
                pool.map(_run_chunk, [(design, rho_true, delta, losses, ch, coord_delta) for ch in chunks])
            )
        fails = sum(p[0] for p in parts)
        coord = sum(p[1] for p in parts)
        violations = sum(p[2] for p in parts)
    bounds = {k: 1.0 - confidence_level(design, k, delta).cl for k in losses}
    c = c_alpha(design)
    return TrialBatchResult(
        trials=trials,
        delta=float(delta),
        N=design.N,
        failures_per_loss={k: int(v) for k, v in zip(losses, fails)},
        bound_one_minus_cl=bounds,
        enm_vs_lls_violations=int(violations),
        coord_failures=coord,
        coord_bounds=2.0 * np.exp(-2.0 * coord_delta**2 * design.N / c),
        coord_delta=float(coord_delta),
    )


def default_n_grid(k, eta, delta, loss=LossKind.TRACE, targets=(0.5, 0.99)):
    """Totals N, rounded up to multiples of 3^k, hitting the given CL targets."""
    settings = 3**k
    grid = []
    for t in targets:
        n = required_samples(k, eta, delta, loss, t)
        grid.append(settings * math.ceil(n / settings))
    return sorted(set(grid))


def coverage_sweep(
    k,
    eta,
    delta,
    n_grid,
    states,
    trials_per_cell,
    base_seed=0,
    losses=ALL_LOSSES,
    workers=1,
    weighting="trace",
):
    """Run :func:`run_batch` over a grid of sample sizes and states.

    ``states`` maps names to density matrices (a list of preset names is
    also accepted). Returns one row dict per (N, state, loss). Cell ``i`` in
    iteration order uses seeds starting at ``base_seed + i * trials_per_cell``.
    """
    if isinstance(states, (list, tuple)):
        states = {name: preset_state(name, k) for name in states}
    losses = tuple(LossKind.parse(x) for x in losses)
    settings = 3**k
    rows = []
    cell = 0
    for N in n_grid:
        n = max(1, math.ceil(N / settings))
        design = pauli_design(k, eta, n, weighting=weighting)
        for name, rho in states.items():
            res = run_batch(
                design, rho, delta, losses, trials_per_cell, base_seed + cell * trials_per_cell, workers
            )
            cell += 1
            coord_flag = bool(np.any(res.coord_flags()))
            for kind in losses:
                bound = res.bound_one_minus_cl[kind]
                rate = res.empirical_error_rate[kind]
                rows.append(
                    {
                        "k": k,
                        "eta": eta,
                        "delta": delta,
                        "N": design.N,
                        "n_per_setting": n,
                        "state": name,
                        "loss": kind.value,
                        "trials": res.trials,
                        "failures": res.failures_per_loss[kind],
                        "empirical": rate,
                        "bound": bound,
                        "sigma": res.sigma(kind),
                        "margin": min(bound, 1.0) - rate,
                        "enm_vs_lls_violations": res.enm_vs_lls_violations,
                        "coord_flagged": coord_flag,
                        "flagged": bool(res.flagged(kind) or res.enm_vs_lls_violations or coord_flag),
                    }
                )
    return rows
