"""Compare the compiled kernels against the pure-numpy fallback.

Run: python3 benchmarks/bench_kernels.py --nodes 20000 --repeats 5
"""

import argparse
import os
import random
import time

import numpy as np

from recipe_mc import kernels


def random_graph(n, degree, seed):
    rng = random.Random(seed)
    return [(u, rng.randrange(n)) for u in range(n) for _ in range(degree)]


def timed(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0, out


def run(flag, cases, repeats):
    os.environ["RECIPE_MC_NUMBA"] = flag
    rows = {}
    for name, fn in cases.items():
        fn()  # warm up the compiler
        rows[name] = timed(fn, repeats)
    return rows


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--nodes", type=int, default=20000)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--letters", type=int, default=4096)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    indptr, indices = kernels.to_csr(args.nodes, random_graph(args.nodes, args.degree, args.seed))
    rng = random.Random(args.seed)
    n_bits = 16
    pis = [rng.randrange(1 << n_bits) for _ in range(args.letters)]
    atoms = [rng.randrange(1 << n_bits) for _ in range(32)]
    kinds = [i % 2 == 0 for i in range(32)]
    cases = {
        "bfs_reach": lambda: kernels.bfs_reach(indptr, indices, [0]),
        "scc": lambda: kernels.scc(indptr, indices),
        "quantifier_truth": lambda: kernels.quantifier_truth(pis, atoms, kinds, n_bits),
    }

    if not kernels._HAVE_NUMBA:
        print("numba is not installed; only the fallback is measured")
    fallback = run("0", cases, args.repeats)
    compiled = run("1", cases, args.repeats)
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name in cases:
        t_np, out_np = fallback[name]
        t_nb, out_nb = compiled[name]
        assert np.array_equal(out_np, out_nb), name
        print(f"{name:<18}{t_np:>12.3f}{t_nb:>12.3f}{t_np / max(t_nb, 1e-9):>9.2f}x")


if __name__ == "__main__":
    main()
