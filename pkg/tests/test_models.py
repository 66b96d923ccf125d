import json

import numpy as np
import pytest

from adaptive_ids.dataset import LIVE_FEATURES, LIVE_SCHEMA, LabeledDataset
from adaptive_ids.errors import ModelFormatError
from adaptive_ids.models import (ClassifierSpec, alarm_degrees, fit_classifier, load_model, margin_to_degree,
                                 predict_labels, save_model)

from conftest import blobs


def live_blobs(n=80, seed=0):
    ds = blobs(n, dim=len(LIVE_FEATURES), sep=1.5, seed=seed)
    return LabeledDataset(np.abs(ds.X), ds.y, LIVE_FEATURES, LIVE_SCHEMA)


def test_spec_parse_and_str():
    s = ClassifierSpec.parse("svm:c=1.57,gamma=0.58")
    assert (s.kind, s.c_param, s.gamma_rbf) == ("svm", 1.57, 0.58)
    assert str(s) == "svm:c=1.57,gamma=0.58"
    assert ClassifierSpec.parse("cart:depth=3,leaf=2").max_depth == 3
    assert ClassifierSpec.parse("NB").kind == "nb"
    with pytest.raises(ValueError):
        ClassifierSpec.parse("svm:cost=2")
    with pytest.raises(ValueError):
        ClassifierSpec.parse("knn")


def test_margin_to_degree():
    assert list(margin_to_degree(np.array([-3.0, -1.0, 0.0, 0.5, 2.0]))) == [0.0, 0.0, 0.5, 0.75, 1.0]


@pytest.mark.parametrize("spec", ["svm:c=1,gamma=0.1", "nb", "cart:depth=5", "fuzzy", "hybrid"])
def test_round_trip_predictions(spec, tmp_path):
    ds = live_blobs()
    model = fit_classifier(ClassifierSpec.parse(spec), ds)
    path = tmp_path / "m.json"
    save_model(model, path, {"note": "x"})
    assert json.loads(path.read_text())["meta"] == {"note": "x"}
    again = load_model(path)
    probe = np.random.default_rng(3).uniform(0, 4, (100, len(LIVE_FEATURES)))
    assert np.array_equal(alarm_degrees(model, probe), alarm_degrees(again, probe))
    d = alarm_degrees(model, probe)
    assert np.all((d >= 0) & (d <= 1))
    assert set(predict_labels(model, probe)) <= {-1, 1}


def test_bad_model_files(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("not json")
    with pytest.raises(ModelFormatError):
        load_model(p)
    p.write_text(json.dumps({"version": 99, "kind": "svm"}))
    with pytest.raises(ModelFormatError):
        load_model(p)
    p.write_text(json.dumps({"version": 1, "kind": "forest"}))
    with pytest.raises(ModelFormatError):
        load_model(p)
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "missing.json")
