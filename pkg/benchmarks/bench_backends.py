"""Time the compiled kernels against the pure-NumPy fallback.

Each backend runs in a fresh subprocess because the choice is pinned at
import time by the ``GTLAND_NUMBA`` environment variable.  Compilation
happens inside a warm-up pass, so the numbers time steady-state work.

Usage::

    python3 benchmarks/bench_backends.py [--repeat N] [--mc-runs N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json
import sys
import time

import numpy as np

import gtland
from gtland import DispersionSpec, preset, run_monte_carlo
from gtland._accel import backend_name

repeat = int(sys.argv[1])
mc_runs = int(sys.argv[2])

# Warm-up: compiles every hot kernel under the accelerated backend.
sc = preset("scenario1")
sc.run(log=False)
run_monte_carlo(DispersionSpec(), 1, seed=0, dt=0.1)

def best_of(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

results = {"backend": backend_name()}
results["closed_loop_dt10ms"] = best_of(lambda: sc.run(log=False))
results["closed_loop_logged"] = best_of(lambda: sc.run(log=True))
results["monte_carlo"] = best_of(
    lambda: run_monte_carlo(DispersionSpec(), mc_runs, seed=7))
json.dump(results, sys.stdout)
"""

CASES = (
    ("closed_loop_dt10ms", "scenario 1 closed loop, dt = 10 ms, no log"),
    ("closed_loop_logged", "scenario 1 closed loop, dt = 10 ms, logged"),
    ("monte_carlo", "dispersed Monte Carlo batch, dt = 10 ms"),
)


def run_backend(flag: str, repeat: int, mc_runs: int) -> dict:
    env = dict(os.environ)
    env["GTLAND_NUMBA"] = flag
    proc = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(repeat), str(mc_runs)],
        capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"backend {flag!r} workload failed")
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repeats, best-of (default: 3)")
    parser.add_argument("--mc-runs", type=int, default=20,
                        help="runs in the Monte Carlo case (default: 20)")
    args = parser.parse_args()

    fast = run_backend("1", args.repeat, args.mc_runs)
    slow = run_backend("0", args.repeat, args.mc_runs)
    if fast["backend"] != "numba" or slow["backend"] != "numpy":
        raise SystemExit("backend selection failed; is numba installed?")

    name_width = max(len(label) for _, label in CASES)
    print(f"{'case':<{name_width}}  {'numba':>10}  {'numpy':>10}  speedup")
    for key, label in CASES:
        a, b = fast[key], slow[key]
        print(f"{label:<{name_width}}  {a * 1e3:>8.1f} ms  {b * 1e3:>8.1f} ms"
              f"  {b / a:>6.1f}x")


if __name__ == "__main__":
    main()
