#!/usr/bin/env python3
"""Benchmark the integrator kernels and the full engine step.

Usage: python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from telesim._kernels import available_kernels
from telesim.params import load_profile
from telesim.retarget import RetargetConfig
from telesim.sim import load_scenario, run_scenario

KERNEL_ARGS = (
    52.0, 1.10, 1.61, 12.6, 0.37, 9.81,   # model constants
    -11.2, -35.0, 12.5, -8.0,             # held forces
    0.02, 20.0, 0.5,                      # arm joint model
    (0.3, -0.1, 0.2, 0.9, 0.25, 0.05, -0.3, 1.2),
    (0.5, 0.0, -0.2, 0.1, -0.4, 0.2, 0.0, 0.3),
)


def bench_raw(kernel, steps: int) -> float:
    y = tuple(np.random.default_rng(7).normal(scale=0.2, size=22))
    t0 = time.perf_counter()
    for _ in range(steps):
        y = kernel.rk4_step(y, 0.002, *KERNEL_ARGS)
    return steps / (time.perf_counter() - t0)


def bench_engine(kernel_name: str, sim_seconds: float) -> float:
    from dataclasses import replace

    human, robot, poly = load_profile(None)
    sc = replace(load_scenario("box_push_8p5"), duration=sim_seconds)
    t0 = time.perf_counter()
    run_scenario(human, robot, poly, RetargetConfig(), sc, kernel=kernel_name)
    return sc.steps / (time.perf_counter() - t0)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--sim-seconds", type=float, default=4.0)
    args = ap.parse_args()

    kernels = available_kernels()
    print(f"available kernels: {', '.join(sorted(kernels))}\n")
    rates = {}
    for name, mod in sorted(kernels.items()):
        rates[name] = bench_raw(mod, args.steps)
        print(f"raw rk4_step     [{name:7s}]: {rates[name]:10.0f} steps/s")
    if "cython" in rates:
        print(f"raw speedup       cython/python: {rates['cython'] / rates['python']:.1f}x")
    print()
    for name in sorted(kernels):
        rate = bench_engine(name, args.sim_seconds)
        print(f"full engine step [{name:7s}]: {rate:10.0f} steps/s")


if __name__ == "__main__":
    main()
