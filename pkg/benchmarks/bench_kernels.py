"""Compare the compiled and pure-Python Gram-LARS kernels.

    python benchmarks/bench_kernels.py [--sizes 5 10 20 45] [--repeat 5]

Times full lasso paths on random positive definite problems, checks that
both kernels return the same knots, and times one EM fit with each kernel
swapped in.
"""

import argparse
import time
from unittest import mock

import numpy as np

from netinf import em
from netinf import _kernels
from netinf._kernels import _lars_c, _lars_py
from netinf.model import Dims, random_sparse_params, simulate


def problems(n, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        X = rng.standard_normal((3 * n, n))
        out.append((X.T @ X / (3 * n) + 0.05 * np.eye(n), rng.standard_normal(n)))
    return out


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_paths(sizes, count, repeat):
    print(f"{'n':>4} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>9}")
    for n in sizes:
        probs = problems(n, count, seed=n)
        max_knots = 8 * n + 16
        py = best_of(lambda: [_lars_py.lars_gram(S, b, max_knots) for S, b in probs], repeat)
        cy = best_of(lambda: [_lars_c.lars_gram(S, b, max_knots) for S, b in probs], repeat)
        diff = 0.0
        for S, b in probs:
            a, c = _lars_py.lars_gram(S, b, max_knots), _lars_c.lars_gram(S, b, max_knots)
            if a[0].shape != c[0].shape:
                diff = np.inf
                break
            diff = max(diff, float(np.max(np.abs(a[0] - c[0]))))
        print(f"{n:>4} {1e3 * py / count:>10.3f} {1e3 * cy / count:>10.3f} {py / cy:>8.1f} {diff:>9.1e}")


def bench_em(p, k, repeat):
    dims = Dims(p=p, k=k, T=10, n_R=20)
    data, _ = simulate(random_sparse_params(dims, 0.1, 1.0, seed=0), dims, seed=1)
    pen = em.Penalties(0.4, 0.4, 0.4, 0.4)
    results = {}
    for name, kernel in (("python", _lars_py.lars_gram), ("cython", _lars_c.lars_gram)):
        with mock.patch.object(_kernels, "lars_gram", kernel):
            results[name] = best_of(lambda: em.em_fit(data, dims, pen), repeat)
    print(f"em_fit p={p} k={k}: python {results['python']:.2f}s, cython {results['cython']:.2f}s, "
          f"speedup {results['python'] / results['cython']:.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 45])
    ap.add_argument("--count", type=int, default=50, help="problems per size")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--no-em", action="store_true", help="skip the end-to-end EM timing")
    args = ap.parse_args()
    if _lars_c is None:
        raise SystemExit("compiled kernel not built (or NETINF_PURE_PYTHON set); "
                         "run `pip install -e . --no-build-isolation` first")
    bench_paths(args.sizes, args.count, args.repeat)
    if not args.no_em:
        bench_em(45, 4, 1)


if __name__ == "__main__":
    main()
