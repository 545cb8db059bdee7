"""Bit-for-bit agreement between the compiled kernels and their pure
fallbacks, plus the GRIDWARD_PURE escape hatch. Everything downstream
(detector, DTW, forest, SVM) assumes the two backends are interchangeable,
so equality here is exact, not approximate."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gridward import _pykernels as pure
from gridward._backend import backend_name

compiled = pytest.importorskip(
    "gridward._kernels", reason="compiled extension not built"
)


def test_this_install_uses_the_compiled_backend():
    assert backend_name() == "compiled"


def test_outlier_severities_parity(rng):
    for _ in range(50):
        n = int(rng.integers(40, 300))
        values = rng.normal(0, 1, n)
        # plant a fault-like excursion in half the draws
        if rng.random() < 0.5:
            k = int(rng.integers(35, n))
            values[k:] += 25.0
        warmup = int(rng.integers(0, 35))
        a = pure.outlier_severities(values, warmup)
        b = compiled.outlier_severities(values, warmup)
        assert a.dtype == b.dtype == np.int8
        assert np.array_equal(a, b)


def test_dtw_cost_parity(rng):
    for _ in range(80):
        m = int(rng.integers(1, 40))
        n = int(rng.integers(1, 40))
        u = rng.normal(0, 1, m)
        v = rng.normal(0, 1, n)
        band = -1 if rng.random() < 0.5 else int(rng.integers(abs(m - n), m + n))
        assert pure.dtw_cost(u, v, band) == compiled.dtw_cost(u, v, band)


def test_dtw_path_parity(rng):
    for _ in range(40):
        m = int(rng.integers(1, 25))
        n = int(rng.integers(1, 25))
        u = rng.normal(0, 1, m)
        v = rng.normal(0, 1, n)
        c0, i0, j0 = pure.dtw_path(u, v, -1)
        c1, i1, j1 = compiled.dtw_path(u, v, -1)
        assert c0 == c1
        assert np.array_equal(i0, i1)
        assert np.array_equal(j0, j1)


def test_best_split_parity(rng):
    for _ in range(40):
        n = int(rng.integers(5, 60))
        d = int(rng.integers(2, 8))
        k = int(rng.integers(2, 5))
        X = rng.normal(0, 1, (n, d))
        if rng.random() < 0.3:
            X[:, 0] = np.round(X[:, 0])  # force duplicate values
        y = rng.integers(0, k, n).astype(np.int32)
        idx = rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False)
        idx = idx.astype(np.int32)
        feats = rng.permutation(d)[: int(rng.integers(1, d + 1))].astype(np.int32)
        f0, t0, g0 = pure.best_split(X, y, idx, feats, k)
        f1, t1, g1 = compiled.best_split(X, y, idx, feats, k)
        assert (f0, t0, g0) == (f1, t1, g1)


def test_tree_apply_parity(rng):
    # node 0 splits feature 0, node 2 splits feature 1, nodes 1/3/4 leaves
    feature = np.array([0, -1, 1, -1, -1], dtype=np.int32)
    threshold = np.array([0.0, 0.0, 0.5, 0.0, 0.0])
    left = np.array([1, -1, 3, -1, -1], dtype=np.int32)
    right = np.array([2, -1, 4, -1, -1], dtype=np.int32)
    X = rng.normal(0, 1, (200, 2))
    X[:10, 0] = 0.0  # rows exactly on the threshold go left
    a = pure.tree_apply(feature, threshold, left, right, X)
    b = compiled.tree_apply(feature, threshold, left, right, X)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {1, 3, 4}
    assert np.all(a[:10] != 2)


def test_trained_tree_apply_parity(small_acf, rng):
    from gridward.classify.forest import train_rf

    t = train_rf(small_acf, n_trees=3, seed=1).trees[0]
    X = rng.normal(0, 0.4, (100, small_acf.feature_dim))
    assert np.array_equal(
        pure.tree_apply(t.feature, t.threshold, t.left, t.right, X),
        compiled.tree_apply(t.feature, t.threshold, t.left, t.right, X),
    )


def test_smo_solve_parity(rng):
    for trial in range(15):
        n = int(rng.integers(6, 40))
        pts = rng.normal(0, 1, (n, 3))
        sq = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        K = np.exp(-0.5 * sq)
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        if np.all(y == y[0]):
            y[0] = -y[0]
        C = float(rng.choice([0.5, 1.0, 10.0]))
        a0, it0, gap0 = pure.smo_solve(K, y, C, 1e-3, 200_000)
        a1, it1, gap1 = compiled.smo_solve(K, y, C, 1e-3, 200_000)
        assert np.array_equal(a0, a1)
        assert it0 == it1
        assert gap0 == gap1


def test_pure_env_var_forces_fallback():
    env = dict(os.environ, GRIDWARD_PURE="1")
    out = subprocess.run(
        [
            sys.executable,
            "-c",
            "from gridward._backend import backend_name; print(backend_name())",
        ],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "pure"


def test_full_detector_matches_across_backends(rng):
    """End-to-end dual route: the public detector built on each backend
    produces identical severities for the same series."""
    values = rng.normal(60.0, 0.01, 400)
    values[250:] += 3.0
    code = (
        "import sys, numpy as np\n"
        "from gridward.anomaly import outlier_vector\n"
        "data = np.frombuffer(sys.stdin.buffer.read())\n"
        "sys.stdout.write(','.join(map(str, outlier_vector(data))))\n"
    )
    runs = {}
    for name, env in (
        ("compiled", dict(os.environ, GRIDWARD_PURE="0")),
        ("pure", dict(os.environ, GRIDWARD_PURE="1")),
    ):
        out = subprocess.run(
            [sys.executable, "-c", code],
            env=env,
            input=values.tobytes(),
            capture_output=True,
            check=True,
        )
        runs[name] = out.stdout
    assert runs["compiled"] == runs["pure"]
