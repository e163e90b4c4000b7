"""Time the compiled SMO loop against the pure-Python/numpy loop.

Usage::

    python3 benchmarks/bench_smo.py [--sizes 500 1000 2000] [--repeat 3]

Both backends solve the same RBF problems; the script checks they reach the
same dual objective before reporting timings. Iteration counts can differ on
larger problems: kernel rows are computed with different floating-point
summation orders, and a last-bit difference can flip a near-tie in the
working-set choice.
"""

import argparse
import time

import numpy as np

from netsvm.svm import KernelSpec, available_backends, solve_dual


def problem(n, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    return X, y


def best_of(repeat, fn):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cache", type=int, default=12_500_000, help="kernel cache budget in Gram entries")
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled core not built; only the Python loop is available")
    spec = KernelSpec("rbf", gamma=1.0 / 3)
    print(f"{'n':>6} " + " ".join(f"{b + ' iters':>13} {b + ' s':>10}" for b in backends) + f" {'speedup':>8}")
    for n in args.sizes:
        X, y = problem(n)
        res = {}
        for b in backends:
            res[b] = best_of(args.repeat, lambda: solve_dual(X, y, spec, 1.0, 1e-3, cache_budget=args.cache, backend=b))
        objs = [r.objective() for _, r in res.values()]
        assert all(r.converged for _, r in res.values())
        assert max(objs) - min(objs) <= 1e-6 * max(1.0, abs(objs[0])), "backends disagree"
        speed = res["python"][0] / res["cython"][0] if "cython" in res else float("nan")
        cells = " ".join(f"{res[b][1].iterations:>13} {res[b][0]:>10.3f}" for b in backends)
        print(f"{n:>6} {cells} {speed:>7.1f}x")


if __name__ == "__main__":
    main()
