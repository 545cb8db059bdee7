"""One-vs-one RBF-kernel SVM trained by sequential minimal optimization.

Each class pair gets its own binary problem; the SMO inner loop (maximal
violating pair selection, KKT gap <= tol) lives in the kernel backend.
Prediction aggregates pairwise votes, breaking vote ties by the summed
magnitude of the pairwise decision values.
"""

from dataclasses import dataclass

import numpy as np

from .._backend import smo_solve
from ..types import FaultLabel, GridwardError
from .data import LabeledDataset


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        (A * A).sum(axis=1)[:, None]
        + (B * B).sum(axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass
class PairSvm:
    pos_class: int  # code voted for when the decision value is positive
    neg_class: int
    sv_x: np.ndarray  # (n_sv, d) support vectors
    coef: np.ndarray  # (n_sv,) alpha_j * y_j
    bias: float
    iterations: int = 0


@dataclass
class SvmModel:
    classes: np.ndarray  # sorted codes present at training time
    pairs: list  # PairSvm, in (i, j) order over classes
    gamma: float
    C: float
    feature_dim: int


def train_svm(
    data: LabeledDataset,
    gamma: float = 0.05,
    C: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 1_000_000,
) -> SvmModel:
    classes = data.classes
    if classes.shape[0] < 2:
        raise GridwardError("train_svm: need at least 2 classes")
    pairs = []
    for a_i in range(classes.shape[0]):
        for b_i in range(a_i + 1, classes.shape[0]):
            ca = int(classes[a_i])
            cb = int(classes[b_i])
            mask = (data.y == ca) | (data.y == cb)
            Xp = data.X[mask]
            yp = np.where(data.y[mask] == ca, 1.0, -1.0)
            K = rbf_kernel(Xp, Xp, gamma)
            alpha, iters, gap = smo_solve(K, yp, C, tol, max_iter)
            if gap > tol:
                raise GridwardError(
                    f"train_svm: pair ({FaultLabel(ca).name}, {FaultLabel(cb).name}) "
                    f"did not converge in {max_iter} iterations (gap {gap:.3g})"
                )
            d = K @ (alpha * yp)  # decision values without bias
            free = (alpha > 0.0) & (alpha < C)
            if free.any():
                bias = float(np.mean(yp[free] - d[free]))
            else:
                # no free vectors: take the midpoint of the feasible interval
                v = yp - d
                up = ((yp > 0) & (alpha < C)) | ((yp < 0) & (alpha > 0))
                low = ((yp < 0) & (alpha < C)) | ((yp > 0) & (alpha > 0))
                m_val = np.max(v[up]) if up.any() else 0.0
                M_val = np.min(v[low]) if low.any() else 0.0
                bias = float((m_val + M_val) / 2.0)
            sv = alpha > 0.0
            pairs.append(
                PairSvm(
                    pos_class=ca,
                    neg_class=cb,
                    sv_x=Xp[sv].copy(),
                    coef=(alpha[sv] * yp[sv]).copy(),
                    bias=bias,
                    iterations=iters,
                )
            )
    return SvmModel(
        classes=classes.astype(np.int32),
        pairs=pairs,
        gamma=gamma,
        C=C,
        feature_dim=data.feature_dim,
    )


def decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """(n, n_pairs) pairwise decision values f(x) = sum coef K(sv, x) + b."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.feature_dim:
        raise GridwardError(
            f"predict: feature dimension {X.shape[1]} != model's "
            f"{model.feature_dim}"
        )
    out = np.empty((X.shape[0], len(model.pairs)), dtype=np.float64)
    for k, pair in enumerate(model.pairs):
        K = rbf_kernel(X, pair.sv_x, model.gamma)
        out[:, k] = K @ pair.coef + pair.bias
    return out


def predict_svm(model: SvmModel, X: np.ndarray):
    """Batch prediction: (codes, confidence). Confidence is the winner's
    vote share out of n_classes - 1 possible votes."""
    d = decision_values(model, X)
    n = d.shape[0]
    k = model.classes.shape[0]
    votes = np.zeros((n, k), dtype=np.int64)
    margin = np.zeros((n, k), dtype=np.float64)
    col = {int(c): i for i, c in enumerate(model.classes)}
    for j, pair in enumerate(model.pairs):
        pos = d[:, j] > 0.0
        cp = col[pair.pos_class]
        cn = col[pair.neg_class]
        votes[pos, cp] += 1
        votes[~pos, cn] += 1
        mag = np.abs(d[:, j])
        margin[pos, cp] += mag[pos]
        margin[~pos, cn] += mag[~pos]
    # winner by votes, then summed |decision|, then lowest class code
    best = votes.max(axis=1, keepdims=True)
    tied_margin = np.where(votes == best, margin, -1.0)
    winner = tied_margin.argmax(axis=1)
    codes = model.classes[winner].astype(np.int32)
    conf = votes[np.arange(n), winner] / max(k - 1, 1)
    return codes, conf
