#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from ssmap import parse_model
from ssmap.backend import available_backends

MODELS = Path(__file__).parent.parent / "models"


def _time(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_system(name: str, cs, n_vars: int, n_points: int, n_steps: int):
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.0, 1.0, size=(n_points, n_vars))
    x0 = np.full(n_vars, 0.9)
    lo = np.full(n_vars, 0.6)
    hi = np.ones(n_vars)
    backends = available_backends()
    print(f"\n{name}: {n_vars} vars, {n_points} points, {n_steps} integration steps")
    header = f"  {'kernel':<18}" + "".join(f"{b:>14}" for b in backends)
    print(header)
    rows = {
        "eval_many": lambda k: k.eval_many(cs, pts),
        "jacobian_many": lambda k: k.jacobian_many(cs, pts[: n_points // 4]),
        "max_jacobian_fro": lambda k: k.max_jacobian_fro(cs, pts),
        "rk4_path": lambda k: k.rk4_path(cs, x0, 0.01, n_steps, n_steps, 0.1),
        "project_iterate": lambda k: k.project_iterate(cs, lo, hi, x0, 1e-10, 2000),
    }
    times: dict[str, dict[str, float]] = {}
    for row, call in rows.items():
        times[row] = {}
        line = f"  {row:<18}"
        for bname, mod in backends.items():
            dt = _time(lambda: call(mod))
            times[row][bname] = dt
            line += f"{dt * 1e3:>12.2f}ms"
        print(line)
    if "compiled" in backends and "python" in backends:
        print("  speedups (python/compiled):")
        for row in rows:
            ratio = times[row]["python"] / max(times[row]["compiled"], 1e-12)
            print(f"    {row:<18}{ratio:>8.1f}x")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()
    scale = 10 if args.quick else 1

    toy = parse_model((MODELS / "toy.model").read_text()).build_hill()
    bench_system("toy (2-var, 3 levels)", toy.compiled(), 2,
                 200_000 // scale, 20_000 // scale)

    nine = parse_model((MODELS / "repressor9.model").read_text()).build_hill(10.0)
    bench_system("repressor9 (9-var Boolean)", nine.compiled(), 9,
                 100_000 // scale, 20_000 // scale)

    if "compiled" not in available_backends():
        print("\nnote: compiled extension not built; only the numpy fallback ran")


if __name__ == "__main__":
    main()
