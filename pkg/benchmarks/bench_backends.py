"""Compare the compiled kernels against the pure-Python fallbacks on
realistic workloads: the streaming outlier scan, one large DTW pair, a
forest split search at training size, and a two-class SMO solve.

Run from the repository root:

    python3 benchmarks/bench_backends.py [--repeats N]

Times are the median of N runs (default 3). The pure backend exists for
installs without a C toolchain; this table is the cost of landing there.
"""

import argparse
import time

import numpy as np

from gridward import _pykernels as pure

try:
    from gridward import _kernels as compiled
except ImportError:
    compiled = None


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _workloads():
    rng = np.random.Generator(np.random.PCG64(7))

    values = rng.normal(60.0, 0.02, 3000)
    values[1200:] += 1.5
    yield (
        "outlier scan, T=3000",
        lambda k: k.outlier_severities(values, 30),
    )

    u = np.cumsum(rng.normal(0, 1, 600))
    v = np.cumsum(rng.normal(0, 1, 600))
    yield ("dtw cost, 600x600", lambda k: k.dtw_cost(u, v, -1))

    X = rng.normal(0, 1, (1602, 20))
    y = rng.integers(0, 9, 1602).astype(np.int32)
    idx = np.arange(1602, dtype=np.int32)
    feats = np.arange(5, dtype=np.int32)
    yield (
        "forest split search, n=1602 d=5",
        lambda k: k.best_split(X, y, idx, feats, 9),
    )

    pts = rng.normal(0, 1, (300, 20))
    sq = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    K = np.exp(-0.05 * sq)
    ysvm = np.where(rng.random(300) < 0.5, 1.0, -1.0)
    yield (
        "smo solve, n=300",
        lambda k: k.smo_solve(K, ysvm, 1.0, 1e-3, 1_000_000),
    )


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if compiled is None:
        print("compiled extension not built; showing pure backend only")
    header = f"{'workload':34} {'pure':>10} {'compiled':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in _workloads():
        t_pure = _median_time(lambda: call(pure), args.repeats)
        if compiled is None:
            print(f"{name:34} {t_pure * 1e3:9.1f}ms {'-':>10} {'-':>9}")
            continue
        t_comp = _median_time(lambda: call(compiled), args.repeats)
        print(
            f"{name:34} {t_pure * 1e3:9.1f}ms {t_comp * 1e3:9.1f}ms "
            f"{t_pure / t_comp:8.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
