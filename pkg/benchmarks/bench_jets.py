#!/usr/bin/env python3
"""Compare the compiled jet kernel against the pure-NumPy fallback.

The backend is chosen once at import time, so each measurement runs in a
child process pinned to one backend through FINSLER_JET_BACKEND.  The parent
merges the timings into a table with the speedup of the compiled kernel.

Usage:  python3 benchmarks/bench_jets.py [--scale N]

``--scale`` multiplies every workload's iteration count (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

_CHILD_FLAG = "_FINSLER_BENCH_CHILD"


def _time(fn, iters: int) -> float:
    fn()  # warm caches, JIT nothing — just first-call setup
    start = time.perf_counter()
    for _ in range(iters):
        fn()
    return (time.perf_counter() - start) / iters


def run_workloads(scale: int) -> dict:
    import numpy as np

    from finsler import Point, curvature_at, parse_metric
    from finsler.geometry import _BUNDLE_CACHE
    from finsler.jets import eval_jet
    from finsler.jetspace import BACKEND_NAME, get_space

    rng = np.random.default_rng(42)
    results = {"backend": BACKEND_NAME, "times": {}}

    def add(name: str, fn, iters: int) -> None:
        results["times"][name] = _time(fn, iters * scale)

    sp26 = get_space(4, 6)
    a26 = rng.standard_normal(sp26.ncoef)
    b26 = rng.standard_normal(sp26.ncoef)
    add("series product  n=2 order=6", lambda: sp26.convolve(a26, b26, 6), 500)

    sp35 = get_space(6, 5)
    a35 = rng.standard_normal(sp35.ncoef)
    b35 = rng.standard_normal(sp35.ncoef)
    add("series product  n=3 order=5", lambda: sp35.convolve(a35, b35, 5), 500)

    F = parse_metric(json.dumps({
        "family": "randers", "n": 3,
        "params": {"a": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "b": [0.5, 0, 0]},
    }))
    p = Point((0.1, -0.2, 0.3), (1.0, 0.4, -0.7))
    add("energy jet      n=3 order=4", lambda: eval_jet(F.lsq_field, p, 4), 50)

    def curvature_cold():
        _BUNDLE_CACHE.clear()
        curvature_at(F, "cartan", p)

    add("curvature pack  n=3 cartan ", curvature_cold, 10)
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=int, default=1,
                        help="multiply every workload's iteration count")
    args = parser.parse_args()

    if os.environ.get(_CHILD_FLAG):
        print(json.dumps(run_workloads(args.scale)))
        return 0

    merged: dict[str, dict] = {}
    for backend in ("cython", "numpy"):
        env = dict(os.environ, FINSLER_JET_BACKEND=backend)
        env[_CHILD_FLAG] = "1"
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--scale",
             str(args.scale)],
            env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"backend {backend!r} unavailable:\n{proc.stderr.strip()}",
                  file=sys.stderr)
            continue
        merged[backend] = json.loads(proc.stdout.strip().splitlines()[-1])

    if not merged:
        print("no backend produced timings", file=sys.stderr)
        return 1
    for backend, rec in merged.items():
        if rec["backend"] != backend:
            print(f"warning: requested {backend!r}, import chose "
                  f"{rec['backend']!r}", file=sys.stderr)

    names = list(next(iter(merged.values()))["times"])
    width = max(len(n) for n in names)
    have_both = "cython" in merged and "numpy" in merged
    header = f"{'workload':<{width}}   cython/iter    numpy/iter"
    if have_both:
        header += "    speedup"
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}"
        for backend in ("cython", "numpy"):
            if backend in merged:
                row += f"   {merged[backend]['times'][name]:>10.3e}s"
            else:
                row += f"   {'—':>11}"
        if have_both:
            ratio = (merged["numpy"]["times"][name]
                     / merged["cython"]["times"][name])
            row += f"   {ratio:>6.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
