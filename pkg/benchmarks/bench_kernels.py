"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each row runs the same work through both kernel sets and checks that the
results agree.  The first numba call per signature includes JIT compilation
(or a cache load), so a warm-up pass runs before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

import maltsev_kan.detect as detect
from maltsev_kan import _kernels as K
from maltsev_kan import algebra as A
from maltsev_kan.algebra import FiniteAlgebra, Signature
from maltsev_kan.detect import Closure
from maltsev_kan.simplicial import circle_free_mod


def _closure(alg, generations):
    def work(ks):
        detect.kernels = ks
        try:
            c = Closure(alg, 5_000_000).run(generations)
            return c.size, c.found
        finally:
            detect.kernels = K.kernels
    return work


def _hom(X, n, i):
    src, dst = X.levels[n], X.levels[n - 1]
    hmap = X.d(n, i).astype(np.int64)

    def work(ks):
        return ks.hom_failure(hmap, src.tables["+"], dst.tables["+"], src.size, dst.size, 2)
    return work


def _fiber(X, n):
    rows = np.stack([X.d(n, i) for i in range(1, n + 1)]).astype(np.int64)
    wanted = rows[:, 7].copy()

    def work(ks):
        return ks.fiber_scan(rows, wanted).tolist()
    return work


CASES = [
    ("closure Heyting chain 3", _closure(A.heyting_chain(3), None)),
    ("closure random m=3 table, 3 generations",
     _closure(FiniteAlgebra("r", 3, Signature((("*", 2),)), {"*": [1, 0, 2, 2, 2, 0, 0, 2, 0]}), 3)),
    ("closure random m=3 table, to stabilization",
     _closure(FiniteAlgebra("r", 3, Signature((("*", 2),)), {"*": [2, 1, 1, 2, 2, 1, 1, 1, 2]}), 5)),
    ("hom check circle Z/5 level 4 -> 3", _hom(circle_free_mod(5, 4), 4, 2)),
    ("fiber scan circle Z/5 level 4", _fiber(circle_free_mod(5, 4), 4)),
]


def _time(fn, ks, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(ks)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'case':45s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s}  agree")
    for name, fn in CASES:
        fn(K.numba_kernels)                       # warm-up / JIT
        t_nb, r_nb = _time(fn, K.numba_kernels, args.repeat)
        t_np, r_np = _time(fn, K.numpy_kernels, args.repeat)
        print(f"{name:45s} {t_nb:9.4f} {t_np:9.4f} {t_np / max(t_nb, 1e-9):8.1f}  {r_nb == r_np}")


if __name__ == "__main__":
    main()
