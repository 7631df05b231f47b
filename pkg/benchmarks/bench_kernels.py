"""Time the learner kernels under numba and pure numpy.

    python3 benchmarks/bench_kernels.py [--rows 2000] [--features 30] [--repeat 5]

Each kernel is called once before timing so numba compilation is excluded.
Outputs of the two backends are checked for agreement first.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from resilpred.learn import _kernels
from resilpred.learn.models import Tree


def backends() -> dict:
    out = {"numpy": (_kernels._best_split_np, _kernels._tree_predict_np, _kernels._sq_dists_np)}
    try:
        out["numba"] = _kernels._njit_versions()
    except ImportError:
        print("numba not installed; timing numpy only")
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--features", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    X = rng.random((args.rows, args.features))
    y = X @ rng.normal(size=args.features) + 0.1 * rng.normal(size=args.rows)
    rows = np.arange(args.rows, dtype=np.int64)
    feats = np.arange(args.features, dtype=np.int64)
    t = Tree(max_depth=8).fit(X, y)
    tree = (t.feature, t.threshold, t.left, t.right, t.value)
    Q = X[: min(400, args.rows)]

    cases = {
        "best_split": lambda k: k[0](X, y, rows, feats, 1),
        "tree_predict": lambda k: k[1](*tree, X),
        "sq_dists": lambda k: k[2](Q, X),
    }
    impls = backends()
    results = {name: {b: fn(k) for b, k in impls.items()} for name, fn in cases.items()}
    for name, by_backend in results.items():
        ref = by_backend["numpy"]
        for b, got in by_backend.items():
            if name == "best_split":
                assert tuple(got)[:2] == tuple(ref)[:2], (name, b, got, ref)
            else:
                assert np.allclose(got, ref, rtol=1e-12, atol=1e-12), (name, b)

    print(f"rows={args.rows} features={args.features} (best of {args.repeat}, ms)")
    print(f"{'kernel':<14}" + "".join(f"{b:>12}" for b in impls) + f"{'speedup':>10}")
    for name, fn in cases.items():
        ms = {b: 1e3 * min(timeit.repeat(lambda k=k: fn(k), number=1, repeat=args.repeat))
              for b, k in impls.items()}
        line = f"{name:<14}" + "".join(f"{ms[b]:12.3f}" for b in impls)
        if "numba" in ms:
            line += f"{ms['numpy'] / ms['numba']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
