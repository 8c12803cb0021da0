"""Compare the compiled and pure-numpy kernels on the hot paths.

Run from the repository root:

    python3 benchmarks/bench_backends.py [--sizes 20,50,100] [--repeats 5]

Times Cholesky factor+inverse, the smallest-eigenvalue routine, and a
full precision-matrix estimate (p simplex solves).  The first compiled
call pays JIT compilation; a warmup pass runs outside the timers.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gbnlearn.backends import load_backend
from gbnlearn.clime import clime
from gbnlearn.model import covariance_of
from gbnlearn.synth import GeneratorConfig, sample_gbn_screened


def _spd(p: int, seed: int) -> np.ndarray:
    g = sample_gbn_screened(GeneratorConfig(p=p, q=min(1.0, 3.0 / p), seed=seed))
    return covariance_of(g).sigma


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeats):
    backends = [load_backend("numpy")]
    try:
        backends.append(load_backend("numba"))
    except ImportError:
        print("numba backend unavailable, timing numpy only")

    rows = []
    for p in sizes:
        sigma = _spd(p, seed=p)
        lam = 0.2
        for be in backends:
            be.chol_factor(sigma, 1e-13)  # warmup (JIT for the compiled path)
            be.min_eig(sigma, 1e-9, 60)

        cases = {
            "chol+inv": lambda be=None: be.chol_inverse(be.chol_factor(sigma, 1e-13)[0]),
            "min_eig": lambda be=None: be.min_eig(sigma, 1e-9, 60),
        }
        timings = {}
        for name, fn in cases.items():
            for be in backends:
                timings[(name, be.NAME)] = _time(lambda: fn(be=be), repeats)
        # clime routes through the sticky active backend; swap it for the
        # measurement and restore afterwards.
        import gbnlearn.backends as bk

        saved = bk._active
        try:
            for be in backends:
                bk._active = be
                clime(sigma, lam)  # warmup
                timings[("clime", be.NAME)] = _time(lambda: clime(sigma, lam), repeats)
        finally:
            bk._active = saved
        for name in ("chol+inv", "min_eig", "clime"):
            row = {"p": p, "kernel": name}
            for be in backends:
                row[be.NAME] = timings[(name, be.NAME)]
            if len(backends) == 2:
                row["speedup"] = row["numpy"] / row["numba"]
            rows.append(row)
    return rows, [be.NAME for be in backends]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="20,50,100")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows, names = bench(sizes, args.repeats)

    header = ["p", "kernel"] + [f"{n} (s)" for n in names]
    if len(names) == 2:
        header.append("speedup")
    widths = [6, 10] + [12] * len(names) + ([8] if len(names) == 2 else [])
    print("".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        cells = [str(row["p"]), row["kernel"]]
        cells += [f"{row[n]:.4g}" for n in names]
        if "speedup" in row:
            cells.append(f"{row['speedup']:.1f}x")
        print("".join(c.ljust(w) for c, w in zip(cells, widths)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
