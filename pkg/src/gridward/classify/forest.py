"""Random forest: bootstrap bagging over Gini-split decision trees.

Trees grow to purity (min leaf 1), choosing at every node the best
midpoint threshold among ceil(sqrt(d)) randomly drawn candidate
features. The split search runs in the kernel backend from integer class
counts, so a fixed seed reproduces the same forest on either backend.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .._backend import best_split, tree_apply
from ..types import GridwardError
from .data import LabeledDataset


@dataclass
class Tree:
    feature: np.ndarray  # int32, -1 marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32 child ids
    right: np.ndarray
    leaf_hist: np.ndarray  # (n_nodes, n_classes) int64 class counts at leaves
    vote: np.ndarray  # int32 per-node majority class index
    bootstrap_idx: np.ndarray = None  # training rows (kept for OOB analysis)


@dataclass
class ForestModel:
    classes: np.ndarray
    trees: list
    n_trees: int
    features_per_split: int
    seed: int
    feature_dim: int


def _tree_rng(seed: int, tree_idx: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(tree_idx,)))
    )


def _candidate_stream(rng: np.random.Generator, d: int, mtry: int):
    base = np.arange(d, dtype=np.int32)
    while True:
        block = rng.permuted(np.tile(base, (64, 1)), axis=1)
        for row in block:
            yield row[:mtry]


def _grow_tree(X, y_idx, idx, n_classes, mtry, rng) -> Tree:
    feature = []
    threshold = []
    left = []
    right = []
    hists = []
    votes = []
    feats = _candidate_stream(rng, X.shape[1], mtry)

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        hists.append(None)
        votes.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, idx)]
    while stack:
        node, rows = stack.pop()
        counts = np.bincount(y_idx[rows], minlength=n_classes)
        hists[node] = counts.astype(np.int64)
        votes[node] = int(np.argmax(counts))
        if rows.shape[0] < 2 or np.count_nonzero(counts) < 2:
            continue
        f, thr, _ = best_split(X, y_idx, rows, next(feats), n_classes)
        if f < 0:
            continue
        mask = X[rows, f] <= thr
        feature[node] = f
        threshold[node] = thr
        nl = new_node()
        nr = new_node()
        left[node] = nl
        right[node] = nr
        stack.append((nr, rows[~mask]))
        stack.append((nl, rows[mask]))
    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_hist=np.asarray(hists, dtype=np.int64),
        vote=np.asarray(votes, dtype=np.int32),
        bootstrap_idx=idx,
    )


def train_rf(
    data: LabeledDataset,
    n_trees: int = 500,
    seed: int = 0,
    features_per_split: int = None,
) -> ForestModel:
    classes = data.classes
    if classes.shape[0] < 2:
        raise GridwardError("train_rf: need at least 2 classes")
    n, d = data.X.shape
    mtry = (
        features_per_split
        if features_per_split is not None
        else int(math.ceil(math.sqrt(d)))
    )
    if not 1 <= mtry <= d:
        raise GridwardError(f"features_per_split must lie in [1, {d}]")
    # class codes to dense indices for counting
    y_idx = np.searchsorted(classes, data.y).astype(np.int32)
    trees = []
    for t in range(n_trees):
        rng = _tree_rng(seed, t)
        boot = rng.integers(0, n, size=n).astype(np.int32)
        trees.append(_grow_tree(data.X, y_idx, boot, classes.shape[0], mtry, rng))
    return ForestModel(
        classes=classes.astype(np.int32),
        trees=trees,
        n_trees=n_trees,
        features_per_split=mtry,
        seed=seed,
        feature_dim=d,
    )


def tree_votes(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Per-row class index voted by one tree."""
    leaves = tree_apply(tree.feature, tree.threshold, tree.left, tree.right, X)
    return tree.vote[leaves]


def predict_rf(model: ForestModel, X: np.ndarray):
    """Batch prediction: (codes, confidence). Confidence is the fraction
    of trees that voted for the winning class."""
    X = np.atleast_2d(np.ascontiguousarray(X, dtype=np.float64))
    if X.shape[1] != model.feature_dim:
        raise GridwardError(
            f"predict: feature dimension {X.shape[1]} != model's "
            f"{model.feature_dim}"
        )
    n = X.shape[0]
    k = model.classes.shape[0]
    counts = np.zeros((n, k), dtype=np.int64)
    rows = np.arange(n)
    for tree in model.trees:
        counts[rows, tree_votes(tree, X)] += 1
    winner = counts.argmax(axis=1)
    codes = model.classes[winner].astype(np.int32)
    conf = counts[rows, winner] / model.n_trees
    return codes, conf
