import numpy as np
import pytest

from gridward.anomaly import (
    DetectorConfig,
    DetectorState,
    Event,
    EventKind,
    Severity,
    classify_sample,
    feed,
    find_trigger,
    heatmap_scores,
    outlier_vector,
    quartiles,
)
from gridward.types import FrozenStationError, GridwardError

from oracles import first_trigger, quartiles_sorted, severities_loop


def test_quartiles_hand_example():
    q = quartiles([1, 2, 3, 4, 5])
    assert (q.q1, q.q3, q.iqr) == (2.0, 4.0, 2.0)


def test_quartiles_constant():
    q = quartiles([7.5] * 4)
    assert (q.q1, q.q3, q.iqr) == (7.5, 7.5, 0.0)


def test_quartiles_validation():
    with pytest.raises(GridwardError):
        quartiles([])
    with pytest.raises(GridwardError):
        quartiles([1.0, np.nan])


def test_quartiles_match_oracle_random_prefixes(rng):
    for _ in range(200):
        n = int(rng.integers(1, 400))
        x = rng.normal(0, 1, n) * rng.uniform(0.1, 50)
        q = quartiles(x)
        q1, q3, iqr = quartiles_sorted(x)
        # bitwise agreement, not approximate
        assert q.q1 == q1 and q.q3 == q3 and q.iqr == iqr


def test_warmup_forces_zero():
    state = DetectorState(config=DetectorConfig(warmup=30))
    for t in range(30):
        assert classify_sample(state, 1e9 if t % 2 else -1e9) == Severity.NORMAL
    assert state.samples_seen == 30


def test_constant_prefix_then_equal_sample_is_normal():
    state = DetectorState(config=DetectorConfig(warmup=30))
    for _ in range(50):
        classify_sample(state, 60.0)
    # IQR = 0 and the bounds equal the value itself: strict inequalities fail
    assert classify_sample(state, 60.0) == Severity.NORMAL
    # any strictly-outside value is immediately severe in the degenerate case
    assert classify_sample(state, 60.0001) == Severity.SEVERE


def test_gaussian_prefix_then_huge_jump_is_severe(rng):
    state = DetectorState()
    xs = rng.normal(0.0, 1.0, 100)
    for x in xs:
        classify_sample(state, x)
    assert classify_sample(state, float(xs.mean()) + 100.0) == Severity.SEVERE


def test_severity_thresholds_are_strict(rng):
    # place a sample exactly on the moderate bound: the bound itself is
    # not an outlier, one ulp above it is
    for trial in range(20):
        base = rng.normal(0, 1, 101)
        q1, q3, iqr = quartiles_sorted(np.append(base, 0.0))
        state = DetectorState(config=DetectorConfig(warmup=0))
        sev = severities_loop(np.append(base, q3 + 1.5 * iqr), warmup=0)[-1]
        assert sev in (0, 1)  # never severe exactly on the 1.5 bound


def test_outlier_vector_matches_loop_oracle(rng):
    for _ in range(15):
        n = int(rng.integers(35, 140))
        x = rng.normal(0, 1, n)
        x[rng.integers(0, n)] += 25.0  # a planted outlier most trials
        got = outlier_vector(x)
        assert got.shape == (n,)
        assert np.array_equal(got, severities_loop(x, warmup=30))


def test_outlier_vector_equals_online_feed(rng):
    x = np.concatenate([rng.normal(0, 0.01, 120), rng.normal(3, 0.01, 80)])
    # batch output equals the online per-sample severities with freezing
    # disabled (huge trigger_n so feed never fires)
    cfg = DetectorConfig(trigger_n=10_000)
    vec = outlier_vector(x, cfg)
    state = DetectorState(config=cfg)
    online = [feed(state, v).severity for v in x]
    assert np.array_equal(vec, np.array(online))


def test_trigger_at_exactly_n_and_reset_at_69():
    cfg = DetectorConfig(trigger_n=70, warmup=0)

    def run(sevs):
        return first_trigger(sevs, threshold=2, trigger_n=70)

    run69 = [2] * 69 + [0] + [2] * 69
    assert run(run69) is None
    assert find_trigger(np.array(run69), cfg) is None
    run70 = [0] * 5 + [2] * 70 + [0] * 5
    assert find_trigger(np.array(run70), cfg) == 5 + 69 == run(run70)


def test_feed_trigger_freezes_station():
    cfg = DetectorConfig(trigger_n=5, warmup=0)
    state = DetectorState(config=cfg)
    for _ in range(40):
        feed(state, 60.0)
    events = [feed(state, 1e6 + i) for i in range(5)]
    kinds = [e.kind for e in events]
    assert kinds[:4] == [EventKind.OUTLIER] * 4
    assert kinds[4] == EventKind.TRIGGERED
    assert events[4].t == 45
    assert state.frozen
    with pytest.raises(FrozenStationError, match="station frozen"):
        feed(state, 60.0)


def test_moderate_threshold_counts_moderates():
    cfg = DetectorConfig(
        trigger_n=3, warmup=0, severity_threshold=Severity.MODERATE
    )
    sevs = np.array([1, 1, 1])
    assert find_trigger(sevs, cfg) == 2
    severe_only = DetectorConfig(trigger_n=3, warmup=0)
    assert find_trigger(sevs, severe_only) is None


def test_severity_monotonicity(rng):
    # anything severe also satisfies the moderate bound when IQR > 0
    for _ in range(300):
        x = rng.normal(0, 1, 80)
        q1, q3, iqr = quartiles_sorted(x)
        if iqr == 0.0:
            continue
        probe = q3 + 3.0 * iqr + abs(rng.normal())
        assert probe > q3 + 1.5 * iqr


def test_heatmap_scores_window_semantics():
    vec = np.zeros(100, dtype=np.int8)
    vec[60:100] = 2
    scores = heatmap_scores([vec], t=100, window=40)
    assert scores.shape == (1,)
    assert scores[0] == 80.0

    assert heatmap_scores([np.zeros(50, dtype=np.int8)], t=50)[0] == 0.0
    # truncated window sums only what exists
    short = np.full(20, 1, dtype=np.int8)
    assert heatmap_scores([short], t=20, window=40)[0] == 20.0

    with pytest.raises(GridwardError):
        heatmap_scores([vec], t=101, window=40)
    with pytest.raises(GridwardError):
        heatmap_scores([vec], t=0, window=40)


def test_detector_config_validation():
    with pytest.raises(GridwardError):
        DetectorConfig(trigger_n=0)
    with pytest.raises(GridwardError):
        DetectorConfig(warmup=-1)
    with pytest.raises(GridwardError):
        DetectorConfig(severity_threshold=Severity.NORMAL)
