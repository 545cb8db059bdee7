import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gridward.classify.data import LabeledDataset
from gridward.features import extract
from gridward.ingest import generate_corpus


@pytest.fixture(scope="session")
def small_corpus():
    # 9 classes x (10+10+8*7) = 76 series; big enough to train on, small
    # enough that every module test stays fast. Narrow onset jitter keeps
    # the classes well separated at this sample count; the acceptance
    # tests use the full-difficulty defaults.
    return generate_corpus(
        seed=1, minor_count=8, major_counts=(10, 10), onset_jitter=90
    )


def _featurize(corpus, method="acf"):
    X = np.array([extract(s, method=method).values for s, _ in corpus])
    y = np.array([lab.value for _, lab in corpus], dtype=np.int32)
    sids = np.array([s.station.station_id for s, _ in corpus], dtype=np.int64)
    return LabeledDataset(X, y, station_ids=sids)


@pytest.fixture(scope="session")
def small_acf(small_corpus):
    return _featurize(small_corpus)


@pytest.fixture
def rng():
    # function-scoped: each test gets a fresh stream, so test order never
    # changes what any single test sees
    return np.random.Generator(np.random.PCG64(20240811))
