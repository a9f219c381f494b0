"""Time the compiled and pure-Python tree kernels on the same inputs.

    python benchmarks/bench_kernels.py [--rows 4096] [--dim 6] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from perftransfer import kernels
from perftransfer.learners import fit_forest, fit_tree


def workloads(rows, dim, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 8, size=(rows, dim)) / 7.0
    y = np.exp(X @ rng.uniform(0.5, 2.0, dim)) * (1 + 0.01 * rng.normal(size=rows))
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.ascontiguousarray(np.take_along_axis(X, order, axis=0).T)
    ys = np.ascontiguousarray(y[order].T)
    tree = fit_tree(X, y, max_depth=None, min_leaf=1)
    return {
        "split_scan": lambda: kernels.split_scan(xs, ys, 2),
        "tree_predict": lambda: tree.predict_encoded(X),
        "fit_tree": lambda: fit_tree(X, y),
        "fit_forest(10)": lambda: fit_forest(X, y, n_trees=10, seed=1),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=4096)
    parser.add_argument("--dim", type=int, default=6)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["python"] + (["compiled"] if kernels.compiled_backend is not None else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the pure-Python backend only")
    results = {}
    for name in backends:
        previous = kernels.use_backend(name)
        try:
            for label, fn in workloads(args.rows, args.dim).items():
                results[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        finally:
            kernels.use_backend(previous)

    print(f"{args.rows} rows x {args.dim} features, best of {args.repeat} (ms)")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label in workloads(8, 2):
        cells = [results[label, b] * 1e3 for b in backends]
        line = f"{label:<16}" + "".join(f"{c:>12.3f}" for c in cells)
        if len(cells) == 2:
            line += f"{cells[0] / cells[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
