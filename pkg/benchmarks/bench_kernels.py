"""Compare the numba and numpy backends of the hot kernels.

Kernel timings call both implementations directly. The end-to-end timing
runs a Monte Carlo batch in a subprocess per backend, since the backend is
fixed when tomocert is first imported.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--trials 200]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from tomocert import _kernels as K

BATCH_SNIPPET = """
import json, time
from tomocert import _accel
from tomocert.bloch import preset_state
from tomocert.measurement import pauli_design
from tomocert.validation import run_batch
design = pauli_design({k}, 0.9, {n})
run_batch(design, preset_state("ghz", {k}), 0.07, trials=2)  # warm-up and JIT
t = time.perf_counter()
run_batch(design, preset_state("ghz", {k}), 0.07, trials={trials})
print(json.dumps({{"backend": _accel.BACKEND, "seconds": time.perf_counter() - t}}))
"""


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_cases(rng):
    cases = []
    for d in (2, 4, 8):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (g + g.conj().T) / 2
        cases.append((f"jacobi_eigh d={d}", K.jacobi_eigh_nb, K.jacobi_eigh_np, (h,)))
    for n in (4, 16, 64):
        v = rng.normal(size=n)
        cases.append((f"project_simplex n={n}", K.project_simplex_nb, K.project_simplex_np, (v,)))
    for m, draws in ((3, 1000), (9, 10_000), (27, 100_000)):
        cdf = np.cumsum(rng.dirichlet(np.ones(m)))
        u = rng.random(draws)
        cases.append((f"count_outcomes m={m} draws={draws}", K.count_outcomes_nb, K.count_outcomes_np, (cdf, u)))
    return cases


def run_batch_timing(k, n, trials, use_numba):
    env = dict(os.environ, TOMOCERT_NUMBA="1" if use_numba else "0")
    code = BATCH_SNIPPET.format(k=k, n=n, trials=trials)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numba (us)':>12s} {'numpy (us)':>12s} {'speed-up':>9s}")
    for name, nb, npf, fargs in kernel_cases(rng):
        nb(*fargs)  # compile outside the timed region
        t_nb = best_of(lambda: nb(*fargs), args.repeat, args.number)
        t_np = best_of(lambda: npf(*fargs), args.repeat, max(1, args.number // 10))
        print(f"{name:40s} {t_nb * 1e6:12.2f} {t_np * 1e6:12.2f} {t_np / t_nb:8.1f}x")

    print()
    print(f"{'run_batch':40s} {'numba (s)':>12s} {'numpy (s)':>12s} {'speed-up':>9s}")
    for k, n in ((1, 800), (2, 900)):
        a = run_batch_timing(k, n, args.trials, True)
        b = run_batch_timing(k, n, args.trials, False)
        label = f"k={k} n={n} trials={args.trials}"
        print(f"{label:40s} {a['seconds']:12.3f} {b['seconds']:12.3f} {b['seconds'] / a['seconds']:8.1f}x")


if __name__ == "__main__":
    main()
