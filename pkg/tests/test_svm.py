import numpy as np
import pytest

from adaptive_ids import svm
from adaptive_ids.dataset import LabeledDataset, apply_minmax
from adaptive_ids.errors import DimensionMismatch, ModelFormatError, SingleClass

from conftest import blobs
from oracles import dual_value, kkt_max_violation, qp_dual, rbf_gram


def test_rbf_kernel_values():
    assert svm.rbf_kernel([1.0, 2.0], [1.0, 2.0], 0.5) == 1.0
    assert svm.rbf_kernel([0.0], [2.0], 0.25) == pytest.approx(np.exp(-1.0))


def test_rbf_matrix_matches_loop():
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(7, 3)), rng.normal(size=(5, 3))
    K = svm.rbf_matrix(A, B, 0.7)
    ref = np.array([[np.exp(-0.7 * np.sum((a - b) ** 2)) for b in B] for a in A])
    assert np.allclose(K, ref, atol=1e-14)


def test_solve_dual_matches_qp_small():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(12, 2))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=12) > 0, 1.0, -1.0)
    K = rbf_gram(X, 0.8)
    alpha, bias, _ = svm.solve_dual(K, y, 2.0, kkt_tol=1e-5)
    _, ref = qp_dual(K, y, 2.0)
    assert dual_value(alpha, y, K) == pytest.approx(ref, abs=1e-6)
    assert abs(alpha @ y) < 1e-9
    assert np.all(alpha >= 0) and np.all(alpha <= 2.0)
    assert kkt_max_violation(alpha, bias, y, K, 2.0) <= 1e-3


def test_train_and_predict_separable():
    ds = blobs(80, sep=4.0, seed=1)
    m = svm.fit_svm(ds, 1.0, 0.5)
    pred = svm.predict_many(m, apply_minmax(m.norm_params, ds.X))
    assert np.mean(pred == ds.y) > 0.95


def test_kkt_of_trained_model():
    ds = blobs(40, sep=1.5, seed=2)
    m = svm.train_smo(ds, 1.0, 0.3, kkt_tol=1e-4)
    assert svm.kkt_violations(m, ds).max() <= 1e-3


def test_zero_decision_is_benign():
    m = svm.SvmModel(np.zeros((1, 2)), np.array([1.0]), -1.0, 0.1, 1.0)
    assert svm.decision_value(m, [0.0, 0.0]) == 0.0
    assert svm.predict(m, [0.0, 0.0]) == -1


def test_single_class_rejected():
    ds = LabeledDataset(np.zeros((4, 2)), np.array([1, 1, 1, 1]), ("a", "b"), "generic")
    with pytest.raises(SingleClass):
        svm.train_smo(ds)


def test_dimension_mismatch():
    m = svm.train_smo(blobs(20, seed=3), 1.0, 0.1)
    with pytest.raises(DimensionMismatch):
        svm.decision_values(m, np.zeros((2, 5)))


def test_json_round_trip():
    m = svm.fit_svm(blobs(30, seed=5), 1.5, 0.4)
    back = svm.SvmModel.from_json(m.to_json())
    probe = np.random.default_rng(0).random((20, 3))
    assert np.array_equal(svm.decision_values(m, probe), svm.decision_values(back, probe))


def test_bad_version():
    d = svm.fit_svm(blobs(20, seed=6)).to_json()
    d["version"] = 99
    with pytest.raises(ModelFormatError):
        svm.SvmModel.from_json(d)
