"""Evaluation protocols: repeated stratified trials, training-budget
sweep, and the preemptive (truncated-window) classification study."""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..anomaly import DetectorConfig, find_trigger, outlier_vector
from ..features import acf, difference
from ..types import FaultLabel, GridwardError
from .ann import predict_ann, train_ann
from .data import LabeledDataset
from .forest import predict_rf, train_rf
from .svm import predict_svm, train_svm

MODEL_KINDS = ("svm", "rf", "ann")


@dataclass
class EvalReport:
    model_kind: str
    accuracies: np.ndarray  # (n_trials,)
    mean: float
    std: float
    confusion: np.ndarray  # (k, k) pooled counts, rows true, cols predicted
    classes: np.ndarray
    train_time_s: float
    predict_time_s: float


def _trial_rng(seed: int, *key) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=key))
    )


def _model_seed(seed: int, *key) -> int:
    return int(
        np.random.SeedSequence(entropy=seed, spawn_key=(*key, 0xBEEF)).generate_state(
            1
        )[0]
    )


def stratified_split(y, train_fraction, rng, clamp=True):
    """Per-class permutation split. With clamp, every class keeps at least
    one sample on each side; without it, returns (None, None, missing)
    when rounding leaves a class out of the training set."""
    train = []
    test = []
    missing = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        k = int(round(train_fraction * members.shape[0]))
        if clamp:
            k = min(max(k, 1), members.shape[0] - 1)
        elif k < 1:
            missing.append(int(c))
            continue
        perm = rng.permutation(members)
        train.append(perm[:k])
        test.append(perm[k:])
    if missing:
        return None, None, missing
    return np.concatenate(train), np.concatenate(test), []


def train_model(kind: str, data: LabeledDataset, seed: int = 0, hyper: dict = None):
    hyper = dict(hyper or {})
    if kind == "svm":
        return train_svm(data, **hyper)
    if kind == "rf":
        hyper.setdefault("seed", seed)
        return train_rf(data, **hyper)
    if kind == "ann":
        hyper.setdefault("seed", seed)
        return train_ann(data, **hyper)
    raise GridwardError(f"unknown model kind {kind!r}; valid: {MODEL_KINDS}")


def predict_model(model, X):
    name = type(model).__name__
    if name == "SvmModel":
        return predict_svm(model, X)
    if name == "ForestModel":
        return predict_rf(model, X)
    if name == "AnnModel":
        return predict_ann(model, X)
    raise GridwardError(f"unknown model type {name}")


def evaluate(
    data: LabeledDataset,
    model_kind: str,
    n_trials: int = 100,
    train_fraction: float = 0.8,
    seed: int = 0,
    hyper: dict = None,
) -> EvalReport:
    """n_trials independent stratified train/test splits; per-trial test
    accuracy, pooled confusion matrix, and wall-clock totals."""
    if not 0.0 < train_fraction < 1.0:
        raise GridwardError("train_fraction must lie in (0, 1)")
    classes = data.classes
    counts = np.bincount(np.searchsorted(classes, data.y))
    thin = [int(classes[i]) for i in np.flatnonzero(counts < 2)]
    if thin:
        names = ", ".join(FaultLabel(c).name for c in thin)
        raise GridwardError(f"evaluate: classes with < 2 samples: {names}")
    k = classes.shape[0]
    accuracies = np.empty(n_trials, dtype=np.float64)
    confusion = np.zeros((k, k), dtype=np.int64)
    train_time = 0.0
    predict_time = 0.0
    for trial in range(n_trials):
        rng = _trial_rng(seed, trial)
        tr, te, _ = stratified_split(data.y, train_fraction, rng)
        t0 = time.perf_counter()
        model = train_model(
            model_kind, data.subset(tr), seed=_model_seed(seed, trial), hyper=hyper
        )
        t1 = time.perf_counter()
        pred, _ = predict_model(model, data.X[te])
        t2 = time.perf_counter()
        train_time += t1 - t0
        predict_time += t2 - t1
        truth = data.y[te]
        accuracies[trial] = float(np.mean(pred == truth))
        ti = np.searchsorted(classes, truth)
        pi = np.searchsorted(classes, pred)
        np.add.at(confusion, (ti, pi), 1)
    return EvalReport(
        model_kind=model_kind,
        accuracies=accuracies,
        mean=float(accuracies.mean()),
        std=float(accuracies.std(ddof=1)) if n_trials > 1 else 0.0,
        confusion=confusion,
        classes=classes.astype(np.int32),
        train_time_s=train_time,
        predict_time_s=predict_time,
    )


def budget_sweep(
    data: LabeledDataset,
    model_kinds,
    fractions,
    trials_per_point: int = 10,
    seed: int = 0,
    hyper: dict = None,
):
    """Mean accuracy per (training fraction, model kind). Fractions whose
    rounded per-class training count hits zero are skipped with a warning
    naming the classes that would go missing.

    Returns a list of dict rows: fraction, kind, mean_accuracy, std.
    hyper, when given, maps model kind to a hyperparameter dict.
    """
    hyper = hyper or {}
    rows = []
    for pi, frac in enumerate(fractions):
        if not 0.0 < frac < 1.0:
            raise GridwardError("sweep fractions must lie in (0, 1)")
        probe = _trial_rng(seed, pi, 0)
        tr, te, missing = stratified_split(data.y, frac, probe, clamp=False)
        if missing:
            names = ", ".join(FaultLabel(c).name for c in missing)
            warnings.warn(
                f"budget_sweep: fraction {frac} skipped; no training samples "
                f"for: {names}",
                stacklevel=2,
            )
            continue
        for kind in model_kinds:
            accs = np.empty(trials_per_point, dtype=np.float64)
            for t in range(trials_per_point):
                rng = _trial_rng(seed, pi, t)
                tr, te, _ = stratified_split(data.y, frac, rng, clamp=False)
                model = train_model(
                    kind,
                    data.subset(tr),
                    seed=_model_seed(seed, pi, t),
                    hyper=hyper.get(kind),
                )
                pred, _ = predict_model(model, data.X[te])
                accs[t] = float(np.mean(pred == data.y[te]))
            rows.append(
                {
                    "fraction": float(frac),
                    "kind": kind,
                    "mean_accuracy": float(accs.mean()),
                    "std": float(accs.std(ddof=1)) if trials_per_point > 1 else 0.0,
                }
            )
    return rows


def classification_windows(
    dataset,
    det_config: DetectorConfig = None,
    max_lag: int = 20,
):
    """Run the detector over labeled raw series and return
    (windows, labels, station_ids, never_triggered): per triggering series
    the values from the first outlier of the triggering run onward."""
    if det_config is None:
        det_config = DetectorConfig()
    windows = []
    labels = []
    sids = []
    never = []
    for series, label in dataset:
        sev = outlier_vector(series, det_config)
        tr = find_trigger(sev, det_config)
        if tr is None:
            never.append(series.station.station_id)
            continue
        start = tr - det_config.trigger_n + 1
        windows.append(series.values[start:])
        labels.append(label)
        sids.append(series.station.station_id)
    return windows, labels, sids, never


def preemptive_curve(
    dataset,
    det_config: DetectorConfig = None,
    sample_counts=(30, 60, 120, 300, 600),
    model_kinds=("rf",),
    trials: int = 10,
    train_fraction: float = 0.8,
    seed: int = 0,
    max_lag: int = 20,
    hyper: dict = None,
):
    """Accuracy as a function of how many samples after the first outlier
    the classifier is allowed to see.

    dataset is a list of labeled (TimeSeries, FaultLabel) pairs. For each
    count c, ACF features are extracted from the c-sample window starting
    at each series' first detected outlier, and model kinds are evaluated
    with stratified trials on those features. Series that never trigger
    are excluded (warning lists their station ids); counts c <= max_lag
    are skipped (ACF needs more samples than lags).

    Returns a list of dict rows: samples, kind, mean_accuracy, std,
    n_series.
    """
    hyper = hyper or {}
    windows, labels, sids, never = classification_windows(
        dataset, det_config, max_lag
    )
    if never:
        warnings.warn(
            f"preemptive_curve: stations never triggered and were excluded: "
            f"{sorted(never)}",
            stacklevel=2,
        )
    if not windows:
        raise GridwardError("preemptive_curve: no series triggered the detector")
    rows = []
    for ci, c in enumerate(sample_counts):
        if c <= max_lag:
            warnings.warn(
                f"preemptive_curve: count {c} skipped (ACF at {max_lag} lags "
                f"needs more than {max_lag} samples)",
                stacklevel=2,
            )
            continue
        feats = []
        codes = []
        short = []
        for w, lab, sid in zip(windows, labels, sids):
            if w.shape[0] < c:
                short.append(sid)
                continue
            feats.append(acf(difference(w[:c]), max_lag).values)
            codes.append(int(lab))
        if short:
            warnings.warn(
                f"preemptive_curve: count {c}: series too short, excluded: "
                f"{sorted(short)}",
                stacklevel=2,
            )
        sub = LabeledDataset(np.asarray(feats), np.asarray(codes, dtype=np.int32))
        for kind in model_kinds:
            accs = np.empty(trials, dtype=np.float64)
            for t in range(trials):
                rng = _trial_rng(seed, ci, t)
                tr, te, _ = stratified_split(sub.y, train_fraction, rng)
                model = train_model(
                    kind,
                    sub.subset(tr),
                    seed=_model_seed(seed, ci, t),
                    hyper=hyper.get(kind),
                )
                pred, _ = predict_model(model, sub.X[te])
                accs[t] = float(np.mean(pred == sub.y[te]))
            rows.append(
                {
                    "samples": int(c),
                    "kind": kind,
                    "mean_accuracy": float(accs.mean()),
                    "std": float(accs.std(ddof=1)) if trials > 1 else 0.0,
                    "n_series": len(sub),
                }
            )
    return rows
