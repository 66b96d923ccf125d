import numpy as np
import pytest

from adaptive_ids import baselines
from adaptive_ids.dataset import LabeledDataset

from conftest import blobs


def test_naive_bayes_posterior_matches_hand_formula():
    X = np.array([[0.0], [0.2], [0.1], [1.0], [0.8], [0.9]])
    y = np.array([-1, -1, -1, 1, 1, 1])
    m = baselines.train_naive_bayes(LabeledDataset(X, y, ("x",), "generic"))
    mu_b, var_b = X[:3, 0].mean(), X[:3, 0].var()
    mu_m, var_m = X[3:, 0].mean(), X[3:, 0].var()

    def log_pdf(x, mu, var):
        return -0.5 * np.log(2 * np.pi * var) - (x - mu) ** 2 / (2 * var)

    x = 0.55
    lb, lm = np.log(0.5) + log_pdf(x, mu_b, var_b), np.log(0.5) + log_pdf(x, mu_m, var_m)
    expect = np.exp(lm) / (np.exp(lb) + np.exp(lm))
    assert baselines.nb_malicious_posterior(m, np.array([[x]]))[0] == pytest.approx(expect, rel=1e-9)


def test_naive_bayes_accuracy():
    ds = blobs(100, sep=3.0, seed=0)
    m = baselines.train_naive_bayes(ds)
    assert np.mean(baselines.predict_nb_many(m, ds.X) == ds.y) > 0.9


def test_cart_fits_conjunction():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 5, dtype=float)
    y = np.array([-1, -1, -1, 1] * 5)
    m = baselines.train_cart(LabeledDataset(X, y, ("a", "b"), "generic"), max_depth=3)
    assert np.array_equal(baselines.predict_tree_many(m, X), y)
    assert m.depth() == 2


def test_cart_depth_limit_and_leaf_fraction():
    ds = blobs(60, sep=0.5, seed=1)
    m = baselines.train_cart(ds, max_depth=1)
    assert m.depth() <= 1
    frac = baselines.tree_malicious_fraction(m, ds.X)
    assert np.all((frac >= 0) & (frac <= 1))


def test_json_round_trips():
    ds = blobs(40, seed=2)
    for m, cls in ((baselines.train_naive_bayes(ds), baselines.NbModel),
                   (baselines.train_cart(ds, 4, 2), baselines.TreeModel)):
        back = cls.from_json(m.to_json())
        assert back.to_json() == m.to_json()
