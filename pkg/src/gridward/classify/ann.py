"""Feed-forward network: input -> tanh hidden layer -> softmax output.

Trained with mini-batch SGD on cross-entropy. Kept in plain numpy on
purpose: the matrices are tiny (20x5 and 5x9 by default), so BLAS-backed
matmuls are already the fast path and a compiled kernel would buy
nothing. gradient_check verifies backprop against central finite
differences, which is what the test suite leans on.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from ..types import GridwardError
from .data import LabeledDataset


@dataclass
class AnnModel:
    W1: np.ndarray  # (d, hidden)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (hidden, k)
    b2: np.ndarray  # (k,)
    classes: np.ndarray
    loss_history: np.ndarray = None

    @property
    def feature_dim(self) -> int:
        return self.W1.shape[0]


def _forward(X, W1, b1, W2, b2):
    A1 = np.tanh(X @ W1 + b1)
    Z2 = A1 @ W2 + b2
    return A1, Z2


def _log_softmax(Z):
    m = Z.max(axis=1, keepdims=True)
    s = Z - m
    return s - np.log(np.exp(s).sum(axis=1, keepdims=True))


def batch_loss(X, y_idx, W1, b1, W2, b2) -> float:
    """Mean cross-entropy of one batch; y_idx are dense class indices."""
    _, Z2 = _forward(X, W1, b1, W2, b2)
    lp = _log_softmax(Z2)
    return float(-lp[np.arange(X.shape[0]), y_idx].mean())


def batch_gradients(X, y_idx, W1, b1, W2, b2):
    """Backprop gradients of the mean cross-entropy; returns
    (loss, dW1, db1, dW2, db2)."""
    B = X.shape[0]
    A1, Z2 = _forward(X, W1, b1, W2, b2)
    lp = _log_softmax(Z2)
    loss = float(-lp[np.arange(B), y_idx].mean())
    P = np.exp(lp)
    P[np.arange(B), y_idx] -= 1.0
    dZ2 = P / B
    dW2 = A1.T @ dZ2
    db2 = dZ2.sum(axis=0)
    dA1 = dZ2 @ W2.T
    dZ1 = dA1 * (1.0 - A1 * A1)  # tanh'
    dW1 = X.T @ dZ1
    db1 = dZ1.sum(axis=0)
    return loss, dW1, db1, dW2, db2


def train_ann(
    data: LabeledDataset,
    hidden: int = 5,
    epochs: int = 2000,
    learning_rate: float = 0.01,
    batch_size: int = 32,
    seed: int = 0,
) -> AnnModel:
    classes = data.classes
    if classes.shape[0] < 2:
        raise GridwardError("train_ann: need at least 2 classes")
    n, d = data.X.shape
    k = classes.shape[0]
    y_idx = np.searchsorted(classes, data.y)
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    )
    W1 = rng.uniform(-0.1, 0.1, size=(d, hidden))
    b1 = rng.uniform(-0.1, 0.1, size=hidden)
    W2 = rng.uniform(-0.1, 0.1, size=(hidden, k))
    b2 = rng.uniform(-0.1, 0.1, size=k)
    history = np.empty(epochs, dtype=np.float64)
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            rows = order[start : start + batch_size]
            loss, dW1, db1, dW2, db2 = batch_gradients(
                data.X[rows], y_idx[rows], W1, b1, W2, b2
            )
            W1 -= learning_rate * dW1
            b1 -= learning_rate * db1
            W2 -= learning_rate * dW2
            b2 -= learning_rate * db2
            total += loss * rows.shape[0]
        mean_loss = total / n
        if not np.isfinite(mean_loss):
            raise GridwardError("train_ann: diverged; lower learning rate")
        history[epoch] = mean_loss
    return AnnModel(W1, b1, W2, b2, classes.astype(np.int32), history)


def predict_ann(model: AnnModel, X: np.ndarray):
    """Batch prediction: (codes, confidence). Confidence is the softmax
    probability of the winning class."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.feature_dim:
        raise GridwardError(
            f"predict: feature dimension {X.shape[1]} != model's "
            f"{model.feature_dim}"
        )
    _, Z2 = _forward(X, model.W1, model.b1, model.W2, model.b2)
    lp = _log_softmax(Z2)
    winner = lp.argmax(axis=1)
    codes = model.classes[winner].astype(np.int32)
    conf = np.exp(lp[np.arange(X.shape[0]), winner])
    return codes, conf


def gradient_check(X, y_idx, W1, b1, W2, b2, step: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences,
    over every parameter coordinate. fp64 throughout."""
    _, dW1, db1, dW2, db2 = batch_gradients(X, y_idx, W1, b1, W2, b2)
    worst = 0.0
    for param, grad in ((W1, dW1), (b1, db1), (W2, dW2), (b2, db2)):
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.shape[0]):
            keep = flat[i]
            flat[i] = keep + step
            up = batch_loss(X, y_idx, W1, b1, W2, b2)
            flat[i] = keep - step
            down = batch_loss(X, y_idx, W1, b1, W2, b2)
            flat[i] = keep
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(gflat[i]) + abs(numeric), 1e-8)
            err = abs(gflat[i] - numeric) / denom
            if err > worst:
                worst = err
    return worst
