import numpy as np
import pytest

from gridward.anomaly import DetectorConfig
from gridward.classify.data import LabeledDataset
from gridward.classify.evaluation import (
    budget_sweep,
    classification_windows,
    evaluate,
    preemptive_curve,
    stratified_split,
    train_model,
)
from gridward.ingest import FaultLabel, generate_corpus, generate_scenario, ScenarioSpec
from gridward.types import GridwardError


def test_stratified_split_is_a_partition(rng):
    y = np.repeat(np.arange(4), [20, 11, 7, 2])
    tr, te, missing = stratified_split(y, 0.8, rng)
    assert missing == []
    assert sorted(np.concatenate([tr, te])) == list(range(y.shape[0]))
    # per-class training counts round(0.8 * n_c), clamped to keep one out
    for c, n_c, want in ((0, 20, 16), (1, 11, 9), (2, 7, 6), (3, 2, 1)):
        assert np.sum(y[tr] == c) == want


def test_stratified_split_2001_gives_1602_399(rng):
    y = np.repeat(np.arange(9), [560, 559] + [126] * 7)
    tr, te, _ = stratified_split(y, 0.8, rng)
    assert tr.shape[0] == 1602
    assert te.shape[0] == 399


def test_stratified_split_unclamped_reports_missing(rng):
    y = np.array([0] * 50 + [1] * 2)
    tr, te, missing = stratified_split(y, 0.1, rng, clamp=False)
    assert tr is None and te is None
    assert missing == [1]  # round(0.1 * 2) = 0


def test_evaluate_deterministic_and_confusion_sums(small_acf):
    r1 = evaluate(small_acf, "rf", n_trials=4, seed=3, hyper={"n_trees": 30})
    r2 = evaluate(small_acf, "rf", n_trials=4, seed=3, hyper={"n_trees": 30})
    assert np.array_equal(r1.accuracies, r2.accuracies)
    assert np.array_equal(r1.confusion, r2.confusion)
    assert r1.mean == pytest.approx(float(r1.accuracies.mean()))
    # pooled confusion rows sum to per-class test counts x trials
    counts = np.bincount(np.searchsorted(small_acf.classes, small_acf.y))
    test_counts = counts - np.clip(np.round(0.8 * counts), 1, counts - 1).astype(int)
    assert np.array_equal(r1.confusion.sum(axis=1), test_counts * 4)


def test_evaluate_rejects_thin_classes():
    X = np.random.default_rng(0).normal(0, 1, (11, 3))
    y = np.array([0] * 10 + [4], dtype=np.int32)
    with pytest.raises(GridwardError, match="GMD2"):
        evaluate(LabeledDataset(X, y), "rf", n_trials=1)


def test_evaluate_validates_fraction_and_kind(small_acf):
    with pytest.raises(GridwardError):
        evaluate(small_acf, "rf", n_trials=1, train_fraction=1.0)
    with pytest.raises(GridwardError, match="unknown model kind"):
        train_model("boost", small_acf)


def test_budget_sweep_rows_and_skip_warning(small_acf):
    with pytest.warns(UserWarning, match="fraction 0.02 skipped"):
        rows = budget_sweep(
            small_acf,
            ["rf"],
            [0.02, 0.5],
            trials_per_point=2,
            seed=0,
            hyper={"rf": {"n_trees": 20}},
        )
    # the 0.02 point cannot cover 8-sample classes and is dropped
    assert [r["fraction"] for r in rows] == [0.5]
    assert set(rows[0]) == {"fraction", "kind", "mean_accuracy", "std"}


def test_budget_sweep_accuracy_increases_for_rf(small_acf):
    rows = budget_sweep(
        small_acf,
        ["rf"],
        [0.2, 0.5, 0.8],
        trials_per_point=4,
        seed=1,
        hyper={"rf": {"n_trees": 40}},
    )
    accs = [r["mean_accuracy"] for r in rows]
    assert accs[-1] >= accs[0]


def _tiny_triggering_corpus():
    # short series but with the onset late enough that the 70-sample
    # trigger run completes while faulted samples are still a small
    # minority of the prefix (the quartiles would otherwise chase the
    # fault and break the run)
    out = []
    for i, lab in enumerate(FaultLabel):
        spec = ScenarioSpec(
            fault_class=lab,
            n_stations=6,
            series_length=700,
            onset_index=380,
            onset_jitter=20,
            long_fraction=0.0,
            station_id_offset=i * 6,
            seed=11,
        )
        out.extend((s, l) for s, l, _ in generate_scenario(spec))
    return out


def test_classification_windows_start_at_first_outlier_of_run():
    data = _tiny_triggering_corpus()
    det = DetectorConfig()
    windows, labels, sids, never = classification_windows(data, det, max_lag=20)
    assert never == []
    assert len(windows) == len(data)
    from gridward.anomaly import find_trigger, outlier_vector

    for (series, _), w in zip(data, windows):
        sev = outlier_vector(series.values, det)
        tr = find_trigger(sev, det)
        start = tr - det.trigger_n + 1
        assert w.shape[0] == series.values.shape[0] - start
        assert np.array_equal(w, series.values[start:])


def test_preemptive_curve_row_shape_and_short_series_warning():
    data = _tiny_triggering_corpus()
    rows = preemptive_curve(
        data,
        sample_counts=(30, 60),
        model_kinds=("rf",),
        trials=2,
        seed=0,
        hyper={"rf": {"n_trees": 20}},
    )
    assert [r["samples"] for r in rows] == [30, 60]
    for r in rows:
        assert 0.0 <= r["mean_accuracy"] <= 1.0
        assert r["n_series"] == len(data)


def test_preemptive_curve_skips_counts_below_lag_window():
    data = _tiny_triggering_corpus()
    with pytest.warns(UserWarning, match="count 10 skipped"):
        rows = preemptive_curve(
            data,
            sample_counts=(10, 40),
            model_kinds=("rf",),
            trials=1,
            seed=0,
            hyper={"rf": {"n_trees": 10}},
        )
    assert [r["samples"] for r in rows] == [40]


def test_preemptive_curve_warns_on_never_triggered():
    data = _tiny_triggering_corpus()
    # a flat series never triggers; it must be excluded by station id
    from gridward.ingest import StationMeta, TimeSeries
    from gridward.types import Channel

    rng = np.random.default_rng(0)
    flat = TimeSeries(
        StationMeta(999, "bus-0999", 45.0, -120.0),
        Channel.FREQUENCY,
        60.0 + rng.normal(0, 0.002, 400),
    )
    with pytest.warns(UserWarning, match="999"):
        rows = preemptive_curve(
            data + [(flat, FaultLabel.GMD2)],
            sample_counts=(40,),
            model_kinds=("rf",),
            trials=1,
            seed=0,
            hyper={"rf": {"n_trees": 10}},
        )
    assert rows[0]["n_series"] == len(data)


def test_preemptive_full_window_approaches_whole_series_accuracy():
    data = _tiny_triggering_corpus()
    rows = preemptive_curve(
        data,
        sample_counts=(30, 200),
        model_kinds=("rf",),
        trials=6,
        seed=2,
        hyper={"rf": {"n_trees": 60}},
    )
    # windows of 200 span essentially the whole post-onset region here
    assert rows[-1]["mean_accuracy"] > 0.9
