"""Model persistence. One .npz per model, no pickling: every payload is a
plain array, plus a JSON header carrying kind, version, and
hyperparameters. Loading a file written by save_model yields a model whose
predictions are identical to the original's.

Forest files do not keep the per-tree bootstrap indices; those exist for
post-training analysis, not prediction, and quintuple the file size.
"""

import json

import numpy as np

from ..types import GridwardError
from .ann import AnnModel
from .forest import ForestModel, Tree
from .svm import PairSvm, SvmModel

MAGIC = "GRIDWARD-MODEL"
VERSION = 1


def _header(kind: str, hyper: dict, feature_dim: int) -> np.ndarray:
    doc = {
        "magic": MAGIC,
        "version": VERSION,
        "kind": kind,
        "feature_dim": int(feature_dim),
        "hyper": hyper,
    }
    return np.frombuffer(json.dumps(doc).encode("utf-8"), dtype=np.uint8)


def _read_header(blob: np.ndarray) -> dict:
    try:
        doc = json.loads(bytes(blob).decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise GridwardError(f"model file: bad header: {e}") from None
    if doc.get("magic") != MAGIC:
        raise GridwardError("model file: not a model file (magic mismatch)")
    if doc.get("version") != VERSION:
        raise GridwardError(
            f"model file: unsupported version {doc.get('version')!r}"
        )
    return doc


def save_model(model, path: str) -> None:
    arrays = {}
    if isinstance(model, SvmModel):
        arrays["header"] = _header(
            "svm",
            {"gamma": model.gamma, "C": model.C},
            model.feature_dim,
        )
        arrays["classes"] = model.classes
        arrays["pair_codes"] = np.asarray(
            [(p.pos_class, p.neg_class) for p in model.pairs], dtype=np.int32
        )
        arrays["biases"] = np.asarray([p.bias for p in model.pairs], dtype=np.float64)
        arrays["iterations"] = np.asarray(
            [p.iterations for p in model.pairs], dtype=np.int64
        )
        for i, p in enumerate(model.pairs):
            arrays[f"sv_x_{i}"] = p.sv_x
            arrays[f"coef_{i}"] = p.coef
    elif isinstance(model, ForestModel):
        arrays["header"] = _header(
            "rf",
            {
                "n_trees": model.n_trees,
                "features_per_split": model.features_per_split,
                "seed": model.seed,
            },
            model.feature_dim,
        )
        arrays["classes"] = model.classes
        # Trees are ragged; concatenate node arrays with an offset table.
        offsets = np.zeros(model.n_trees + 1, dtype=np.int64)
        for i, t in enumerate(model.trees):
            offsets[i + 1] = offsets[i] + t.feature.shape[0]
        arrays["offsets"] = offsets
        arrays["feature"] = np.concatenate([t.feature for t in model.trees])
        arrays["threshold"] = np.concatenate([t.threshold for t in model.trees])
        arrays["left"] = np.concatenate([t.left for t in model.trees])
        arrays["right"] = np.concatenate([t.right for t in model.trees])
        arrays["leaf_hist"] = np.concatenate([t.leaf_hist for t in model.trees])
        arrays["vote"] = np.concatenate([t.vote for t in model.trees])
    elif isinstance(model, AnnModel):
        arrays["header"] = _header(
            "ann", {"hidden": model.W1.shape[1]}, model.feature_dim
        )
        arrays["classes"] = model.classes
        arrays["W1"] = model.W1
        arrays["b1"] = model.b1
        arrays["W2"] = model.W2
        arrays["b2"] = model.b2
        arrays["loss_history"] = model.loss_history
    else:
        raise GridwardError(f"save_model: unknown model type {type(model).__name__}")
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_model(path: str):
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as e:
        raise GridwardError(f"model file {path}: {e}") from None
    with data:
        if "header" not in data:
            raise GridwardError("model file: missing header")
        doc = _read_header(data["header"])
        kind = doc["kind"]
        if kind == "svm":
            codes = data["pair_codes"]
            biases = data["biases"]
            iters = data["iterations"]
            pairs = [
                PairSvm(
                    pos_class=int(codes[i, 0]),
                    neg_class=int(codes[i, 1]),
                    sv_x=data[f"sv_x_{i}"],
                    coef=data[f"coef_{i}"],
                    bias=float(biases[i]),
                    iterations=int(iters[i]),
                )
                for i in range(codes.shape[0])
            ]
            return SvmModel(
                classes=data["classes"],
                pairs=pairs,
                gamma=float(doc["hyper"]["gamma"]),
                C=float(doc["hyper"]["C"]),
                feature_dim=int(doc["feature_dim"]),
            )
        if kind == "rf":
            offsets = data["offsets"]
            feature = data["feature"]
            threshold = data["threshold"]
            left = data["left"]
            right = data["right"]
            leaf_hist = data["leaf_hist"]
            vote = data["vote"]
            trees = []
            for i in range(offsets.shape[0] - 1):
                a, b = int(offsets[i]), int(offsets[i + 1])
                trees.append(
                    Tree(
                        feature=feature[a:b].copy(),
                        threshold=threshold[a:b].copy(),
                        left=left[a:b].copy(),
                        right=right[a:b].copy(),
                        leaf_hist=leaf_hist[a:b].copy(),
                        vote=vote[a:b].copy(),
                        bootstrap_idx=None,
                    )
                )
            return ForestModel(
                classes=data["classes"],
                trees=trees,
                n_trees=int(doc["hyper"]["n_trees"]),
                features_per_split=int(doc["hyper"]["features_per_split"]),
                seed=int(doc["hyper"]["seed"]),
                feature_dim=int(doc["feature_dim"]),
            )
        if kind == "ann":
            return AnnModel(
                W1=data["W1"],
                b1=data["b1"],
                W2=data["W2"],
                b2=data["b2"],
                classes=data["classes"],
                loss_history=data["loss_history"],
            )
        raise GridwardError(f"model file: unknown kind {kind!r}")
