"""Acceptance criteria 1 to 10, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line (also collected
into the terminal summary) and then asserts.
"""

import itertools
import math
import time

import mpmath as mp
import numpy as np
import pytest

from tomocert.bloch import (
    from_bloch,
    pauli_basis,
    preset_state,
    random_density_matrix,
    random_pure_state,
    to_bloch,
)
from tomocert.cli import main
from tomocert.confidence import (
    b_constant,
    closed_form_cl_k,
    cls_confidence_level,
    confidence_level,
    figure2_curves,
)
from tomocert.estimators import cls_estimate, cls_objective, enm_estimate, lls_estimate
from tomocert.loss import ALL_LOSSES, hs_distance, infidelity, linf_distance, trace_distance
from tomocert.measurement import born_probabilities, pauli_design, sample
from tomocert.validation import coverage_sweep, default_n_grid

from .conftest import ACCEPTANCE_LINES, random_hermitian


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_01_closed_form_reproduction():
    pauli_design(1, 1.0, 1)  # warm the compiled kernels
    start = time.perf_counter()
    worst = 0.0
    for k, eta in itertools.product((1, 2, 3), (1.0, 0.9, 0.8)):
        design = pauli_design(k, eta, 100)
        for delta, loss in itertools.product((0.03, 0.07, 0.15), ALL_LOSSES):
            for N in (design.N, 10**4, 10**6):
                got = confidence_level(design, loss, delta, N=N).cl
                worst = max(worst, abs(got - closed_form_cl_k(k, eta, delta, N, loss)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    record(1, ok, f"max |CL - closed form| = {worst:.2e}, runtime {elapsed:.3f} s")
    assert ok


def test_criterion_02_headline_number():
    mp.mp.dps = 50
    eta, delta, N = mp.mpf("0.9"), mp.mpf("0.07"), 7500
    oracle = 1 - 6 * mp.exp(-(mp.mpf(2) / 9) * eta**2 * delta**2 * N)
    cl = confidence_level(pauli_design(1, 0.9, 2500), "trace", 0.07).cl
    ok = cl >= 0.99 and abs(cl - 0.99196) <= 1e-4 and abs(cl - float(oracle)) <= 1e-12
    record(2, ok, f"CL(N=7500) = {cl:.12f}, extended-precision oracle {mp.nstr(oracle, 15)}")
    assert ok


def test_criterion_03_two_qubit_terms():
    design = pauli_design(2, 0.85, 100)
    eta, delta, N = 0.85, 0.07, design.N
    rep = confidence_level(design, "trace", delta)
    rates = rep.b / rep.c  # per-generator exponent per unit delta^2 N
    groups = {}
    for r in rates:
        key = next((g for g in groups if abs(g - r) <= 1e-12), r)
        groups[key] = groups.get(key, 0) + 2
    expected = {2 / 135 * eta**4: 18, 2 / 45 * eta**2: 12}
    ok = len(groups) == 2
    for rate, mult in expected.items():
        match = [g for g in groups if abs(g - rate) <= 1e-12]
        ok = ok and len(match) == 1 and groups[match[0]] == mult
    failure = 18 * math.exp(-2 / 135 * eta**4 * delta**2 * N) + 12 * math.exp(-2 / 45 * eta**2 * delta**2 * N)
    ok = ok and abs(rep.cl - (1 - failure)) <= 1e-12
    record(3, ok, "rate:multiplicity " + ", ".join(f"{float(g):.12g}:{m}" for g, m in sorted(groups.items())))
    assert ok


@pytest.mark.slow
def test_criterion_04_empirical_validity():
    delta, trials = 0.07, 2000
    rows = []
    start = time.perf_counter()
    for block, (k, eta) in enumerate(itertools.product((1, 2), (1.0, 0.9, 0.8))):
        grid = default_n_grid(k, eta, delta)
        rows += coverage_sweep(
            k, eta, delta, grid, ["mixed", "zero", "ghz"], trials, base_seed=block * 10**7
        )
    elapsed = time.perf_counter() - start
    # N is placed on the trace-distance curve; the other losses share those N
    in_range = all(1e-3 <= r["bound"] <= 0.5 + 1e-12 for r in rows if r["loss"] == "trace")
    bad = [r for r in rows if r["empirical"] > r["bound"] + 3 * r["sigma"]]
    enm_vs_lls = sum(r["enm_vs_lls_violations"] for r in rows)
    tightest = max(rows, key=lambda r: r["empirical"] / (min(r["bound"], 1.0) + 3 * r["sigma"]))
    ok = not bad and in_range and len(rows) == 2 * 3 * 2 * 3 * 3
    record(
        4,
        ok,
        f"{len(rows)} cells, {len(bad)} above bound + 3 sigma, trace-loss N in range: {in_range}; "
        f"tightest cell k={tightest['k']} eta={tightest['eta']} N={tightest['N']} {tightest['state']} "
        f"{tightest['loss']}: empirical {tightest['empirical']:.4f} vs bound {tightest['bound']:.4f}; "
        f"ENM-vs-LLS violations {enm_vs_lls}; runtime {elapsed:.0f} s",
    )
    assert ok


def test_criterion_05_enm_dominates_lls():
    rng = np.random.default_rng(5)
    configs = [(1, 1.0, 20), (1, 0.8, 50), (2, 0.9, 20), (2, 0.7, 60)]
    per_config = 2500
    count = violations = 0
    worst = -np.inf
    for k, eta, n in configs:
        design = pauli_design(k, eta, n)
        for t in range(per_config):
            if t % 3 == 0:
                rho = random_pure_state(2**k, rng)
            elif t % 3 == 1:
                rho = preset_state(("zero", "ghz", "mixed")[t % 9 // 3], k)
            else:
                rho = random_density_matrix(2**k, rng)
            s = to_bloch(rho, design.basis)
            s_lls, rho_lls = lls_estimate(design, sample(design, rho, seed=count))
            s_enm = to_bloch(enm_estimate(rho_lls), design.basis)
            gap = np.linalg.norm(s_enm - s) - np.linalg.norm(s_lls - s)
            worst = max(worst, gap)
            violations += gap > 1e-10
            count += 1
    ok = count >= 10**4 and violations == 0
    record(5, ok, f"{count} datasets, {violations} violations, max(|s_enm-s| - |s_lls-s|) = {worst:.3e}")
    assert ok


def _fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def test_criterion_06_projection_correctness():
    rng = np.random.default_rng(6)
    # 10^6 candidate density matrices: a dense sphere of pure states plus random mixed states
    sphere = _fibonacci_sphere(600_000)
    ball = rng.normal(size=(400_000, 3))
    ball *= (rng.random(400_000) ** (1 / 3) / np.linalg.norm(ball, axis=1))[:, None]
    cand_s = np.concatenate([sphere, ball])
    X, Y, Z = np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])
    cands = 0.5 * (np.eye(2) + np.einsum("na,aij->nij", cand_s, np.array([X, Y, Z])))
    resolution = 2 * math.sqrt(4 * math.pi / len(sphere))  # twice the mean point spacing on the sphere

    basis = pauli_basis(1)
    worst_excess = worst_pos = 0.0
    for _ in range(20):
        direction = rng.normal(size=3)
        s_in = direction / np.linalg.norm(direction) * rng.uniform(1.05, 3.0)
        rho_lls = from_bloch(s_in, basis)
        assert np.linalg.eigvalsh(rho_lls)[0] < 0
        dists = np.linalg.norm((cands - rho_lls).reshape(len(cands), -1), axis=1)
        best = int(np.argmin(dists))
        rho_enm = enm_estimate(rho_lls)
        worst_excess = max(worst_excess, np.linalg.norm(rho_enm - rho_lls) - dists[best])
        worst_pos = max(worst_pos, np.linalg.norm(to_bloch(rho_enm, basis) - cand_s[best]))

    worst_idem = worst_nonexp = 0.0
    for i in range(1000):
        d = 2 if i % 2 else 4
        u, v = (random_hermitian(rng, d, 1.5) for _ in range(2))
        u += (1 - np.trace(u).real) / d * np.eye(d)
        v += (1 - np.trace(v).real) / d * np.eye(d)
        pu, pv = enm_estimate(u), enm_estimate(v)
        worst_idem = max(worst_idem, np.max(np.abs(enm_estimate(pu) - pu)))
        worst_nonexp = max(worst_nonexp, np.linalg.norm(pu - pv) - np.linalg.norm(u - v))

    ok = worst_excess <= 1e-12 and worst_pos <= resolution and worst_idem <= 1e-10 and worst_nonexp <= 1e-12
    record(
        6,
        ok,
        f"ENM distance minus best of 10^6 candidates <= {worst_excess:.1e}, Bloch offset {worst_pos:.4f} "
        f"(resolution {resolution:.4f}), idempotence {worst_idem:.1e}, non-expansion excess {worst_nonexp:.1e}",
    )
    assert ok


def test_criterion_07_loss_inequalities():
    rng = np.random.default_rng(7)
    slack = 1e-9
    worst = np.full(4, -np.inf)
    pairs = 0
    for d, basis in ((2, pauli_basis(1)), (4, pauli_basis(2))):
        for i in range(10**4):
            a = random_pure_state(d, rng) if i % 4 == 0 else random_density_matrix(d, rng, rank=1 + i % d)
            b = random_density_matrix(d, rng) if i % 5 else random_pure_state(d, rng)
            hs, tr, inf = hs_distance(a, b), trace_distance(a, b), infidelity(a, b)
            linf = linf_distance(to_bloch(a, basis), to_bloch(b, basis))
            gaps = [
                tr - math.sqrt(d / 2) * hs,
                inf - math.sqrt(2 * d) * hs,
                inf - 2 * tr,
                hs - math.sqrt(d * d - 1) / 2 * linf,
            ]
            worst = np.maximum(worst, gaps)
            pairs += 1
    ok = bool(np.all(worst <= slack)) and pairs == 2 * 10**4
    record(7, ok, f"{pairs} pairs, max violation per inequality {np.array2string(worst, precision=3)}")
    assert ok


def test_criterion_08_cls():
    ideal = pauli_design(1, 1.0, 100)
    equal = all(
        cls_confidence_level(ideal, loss, delta).cl == confidence_level(ideal, loss, delta).cl
        for loss in ALL_LOSSES
        for delta in (0.03, 0.07, 0.15)
    )

    rng = np.random.default_rng(8)
    descent_gap = -np.inf
    pyth = 0.0
    datasets = 0
    for k, eta, n in [(1, 1.0, 30), (1, 0.8, 30), (2, 0.9, 20), (2, 0.7, 40)]:
        design = pauli_design(k, eta, n)
        # the Pythagorean split is orthogonal for the plain least-squares inverse
        plain = pauli_design(k, eta, n, weighting="none")
        for t in range(25):
            rho = random_pure_state(2**k, rng) if t % 2 else random_density_matrix(2**k, rng)
            f = sample(design, rho, seed=1000 + datasets).frequencies
            s_enm = to_bloch(enm_estimate(lls_estimate(design, f)[1]), design.basis)
            res = cls_estimate(design, f)
            descent_gap = max(descent_gap, res.residual - cls_objective(design, s_enm, f))
            p_lls = born_probabilities(plain, lls_estimate(plain, f)[0])
            for _ in range(4):
                p_prime = born_probabilities(plain, to_bloch(random_density_matrix(2**k, rng), plain.basis))
                lhs = np.sum((p_prime - f) ** 2)
                rhs = np.sum((p_prime - p_lls) ** 2) + np.sum((p_lls - f) ** 2)
                pyth = max(pyth, abs(lhs - rhs))
            datasets += 1
    ok = equal and descent_gap <= 1e-10 and pyth <= 1e-8
    record(
        8,
        ok,
        f"CLS CL == ENM CL at k=1 eta=1: {equal}; max(obj_cls - obj_enm) = {descent_gap:.2e} over "
        f"{datasets} datasets; Pythagorean residual {pyth:.1e}",
    )
    assert ok


def test_criterion_09_figure2_shape():
    delta = 0.07
    etas = (1.0, 0.9, 0.8)
    rows = figure2_curves(ks=(1, 2), etas=etas, delta=delta, points=120)
    monotone = True
    worst_rel = 0.0
    for k, eta in itertools.product((1, 2), etas):
        curve = [r for r in rows if r["k"] == k and r["eta"] == eta]
        n = np.array([r["N"] for r in curve], dtype=float)
        y = np.array([r["one_minus_cl"] for r in curve])
        monotone &= bool(np.all(np.diff(n) > 0) and np.all(np.diff(y) < 0))
        tail = y < 1e-2
        slopes = np.diff(np.log(y[tail])) / np.diff(n[tail])
        rate = b_constant("trace", 2**k) * 2.0 ** (k - 3) * eta ** (2 * k) / 3**k
        worst_rel = max(worst_rel, float(np.max(np.abs(slopes / (-rate * delta**2) - 1))))
    ok = monotone and worst_rel <= 0.01
    record(9, ok, f"6 curves monotone: {monotone}; max relative slope error {worst_rel:.2e} where 1-CL < 1e-2")
    assert ok


def _run_all_commands(capsys):
    outputs = []
    commands = [
        ["simulate", "--qubits", "2", "--eta", "0.9", "--n", "300", "--state", "ghz", "--seed", "11", "--out", "run"],
        ["estimate", "--run", "run", "--cls", "--target", "target.json"],
        ["certify", "--qubits", "2", "--eta", "0.9", "--delta", "0.2", "--target", "target.json",
         "--est", "run/estimate.json", "--cls", "--out", "cert.json"],
        ["plan", "--qubits", "2", "--eta", "0.9", "--delta", "0.07", "--target-cl", "0.99"],
        ["figure2", "--out", "fig2.csv"],
        ["validate", "--qubits", "1", "--etas", "0.9", "--trials", "20", "--seed", "4", "--out", "val",
         "--workers", "2"],
    ]
    codes = []
    for argv in commands:
        codes.append(main(argv))
        outputs.append(capsys.readouterr().out)
    files = {}
    for path in ["run/frequencies.csv", "run/design.json", "run/estimate.json", "cert.json", "fig2.csv",
                 "val/coverage.csv", "val/coverage.json"]:
        with open(path, "rb") as fh:
            files[path] = fh.read()
    return codes, outputs, files


def test_criterion_10_determinism(tmp_path, monkeypatch, capsys):
    from tomocert.io import dumps, matrix_to_json

    monkeypatch.chdir(tmp_path)
    (tmp_path / "target.json").write_text(dumps(matrix_to_json(preset_state("ghz", 2))))
    first = _run_all_commands(capsys)
    second = _run_all_commands(capsys)
    same = first == second
    ok = same and all(c == 0 for c in first[0])
    record(10, ok, f"exit codes {first[0]}; {len(first[2])} files and all stdout byte-identical: {same}")
    assert ok
