"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]

Both backends consume the same pre-drawn random numbers, so the script also
asserts that their outputs agree exactly.
"""
import argparse
import time

import numpy as np

from statmech._kernels import backends
from statmech.mcmc import SpinTarget


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(steps, seed=1):
    rng = np.random.default_rng(seed)
    tg = SpinTarget.ising1d(16, 1.0, 0.1)
    sites = rng.integers(0, 16, steps)
    u = rng.random(steps)
    s0 = np.ones(16, dtype=np.int64)
    q, n = 3, 4
    table = rng.normal(size=q**n)
    tsites = rng.integers(0, n, steps)
    offs = rng.integers(1, q, steps)
    x0 = np.zeros(n, dtype=np.int64)
    Q = np.array([[0.9, 0.1], [0.1, 0.9]])
    W = np.array([[0.8, 0.2], [0.2, 0.8]])
    pi = np.array([0.5, 0.5])
    ys = rng.integers(0, 2, steps)
    return {
        "metropolis_spins": lambda m: m.metropolis_spins(s0.copy(), tg.J, tg.h, 0.7, sites, u),
        "heat_bath_spins": lambda m: m.heat_bath_spins(s0.copy(), tg.J, tg.h, 0.7, sites, u),
        "metropolis_table": lambda m: m.metropolis_table(x0.copy(), q, table, 0.9, tsites, offs, u),
        "heat_bath_table": lambda m: m.heat_bath_table(x0.copy(), q, table, 0.9, tsites, u),
        "hmm_forward": lambda m: m.hmm_forward_increments(Q, W, pi, ys),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mods = backends()
    print(f"{'kernel':<18}" + "".join(f"{k:>12}" for k in mods) + f"{'speedup':>10}")
    for name, call in cases(args.steps).items():
        times, outs = {}, {}
        for k, m in mods.items():
            times[k], outs[k] = _best(lambda: call(m), args.repeat)
        if len(outs) == 2:
            pa, cy = (o if isinstance(o, tuple) else (o,) for o in (outs["python"], outs["cython"]))
            for x, y in zip(pa, cy):
                assert np.array_equal(np.asarray(x), np.asarray(y)), f"{name}: backends disagree"
        sp = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<18}" + "".join(f"{times[k]:>11.4f}s" for k in mods) + f"{sp:>9.1f}x")


if __name__ == "__main__":
    main()
