import json

import numpy as np
import pytest

from adaptive_ids.dataset import LabeledDataset
from adaptive_ids.errors import EmptyInput, LengthMismatch, UndefinedRate
from adaptive_ids.evalmetrics import (ConfusionMatrix, MetricsReport, confusion, cross_validate,
                                      detection_accuracy, detection_rate, format_summary_table, rates)

from conftest import blobs
from oracles import brute_confusion


def test_confusion_against_counting():
    rng = np.random.default_rng(0)
    t = rng.choice([-1, 1], 500)
    p = rng.choice([-1, 1], 500)
    cm = confusion(t, p)
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == brute_confusion(t, p)


def test_rates_and_identities():
    cm = ConfusionMatrix(tp=8, fp=3, tn=27, fn=2)
    tpr, fpr, fnr = rates(cm)
    assert (tpr, fpr, fnr) == (0.8, 0.1, 0.2)
    assert detection_rate(tpr, fnr) == tpr
    assert detection_accuracy(tpr, fnr, fpr) == pytest.approx(1 / (1 + fpr), abs=1e-12)


def test_spot_values():
    assert detection_rate(0.9, 0.1) == 0.9
    assert detection_accuracy(0.9, 0.1, 0.25) == 0.8


def test_errors():
    with pytest.raises(LengthMismatch):
        confusion([1, -1], [1])
    with pytest.raises(EmptyInput):
        confusion([], [])
    with pytest.raises(UndefinedRate) as e:
        rates(ConfusionMatrix(tp=0, fp=1, tn=1, fn=0))
    assert e.value.which == "P"
    with pytest.raises(UndefinedRate) as e:
        rates(ConfusionMatrix(tp=1, fp=0, tn=0, fn=0))
    assert e.value.which == "N"
    with pytest.raises(UndefinedRate):
        detection_rate(0.0, 0.0)


def test_report_summary_and_table():
    r = MetricsReport.from_confusion(ConfusionMatrix(tp=968, fp=7, tn=993, fn=32))
    assert r.summary() == "DR 96.8%, FPR 0.7%, DA 99.3%"
    table = format_summary_table({"SVM": r})
    assert "SVM" in table and "96.8%" in table


def test_cross_validate_deterministic_and_json():
    ds = blobs(80, sep=2.0, seed=3)
    a = cross_validate(ds, "svm:c=1,gamma=0.5", k=5, seed=11)
    b = cross_validate(ds, "svm:c=1,gamma=0.5", k=5, seed=11)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    assert len(a.folds) == 5
    assert a.report.tpr == pytest.approx(np.mean([f.tpr for f in a.folds]))
    assert a.report.counts.P == 40 and a.report.counts.N == 40


def test_cross_validate_scaling_fitted_on_train_only():
    ds = blobs(60, seed=4)
    X = ds.X.copy()
    X[7, 0] = 1e9  # sentinel
    ds = LabeledDataset(X, ds.y, ds.feature_names, ds.schema_id)
    res = cross_validate(ds, "nb", k=6, seed=0)
    from adaptive_ids.dataset import stratified_kfold
    for (train, test), norm in zip(stratified_kfold(ds, 6, 0), res.fold_norms):
        assert norm.hi[0] == X[train, 0].max()
        if 7 in test:
            assert norm.hi[0] < 1e9


@pytest.mark.parametrize("spec", ["nb", "cart:depth=4", "fuzzy:config=standalone", "hybrid"])
def test_cross_validate_other_kinds(spec):
    from adaptive_ids.dataset import LIVE_FEATURES, LIVE_SCHEMA
    ds = blobs(60, dim=12, sep=1.5, seed=5, names=LIVE_FEATURES)
    ds = LabeledDataset(np.abs(ds.X), ds.y, LIVE_FEATURES, LIVE_SCHEMA)
    res = cross_validate(ds, spec, k=3, seed=1)
    assert 0.0 <= res.report.fpr <= 1.0


def test_ten_folds_of_ten():
    res = cross_validate(blobs(100, sep=3.0, seed=6), "nb", k=10, seed=0)
    assert len(res.folds) == 10
    assert all(f.counts.P + f.counts.N == 10 for f in res.folds)


def test_separable_data_gives_perfect_accuracy():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.uniform(0, 1, (40, 2)), rng.uniform(3, 4, (40, 2))])
    y = np.array([-1] * 40 + [1] * 40)
    res = cross_validate(LabeledDataset(X, y, ("a", "b"), "generic"), "svm:c=10,gamma=1", k=5, seed=2)
    assert res.report.fpr == 0.0 and res.report.da == 1.0
