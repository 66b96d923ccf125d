"""Gaussian naive Bayes and a Gini CART tree, the comparison classifiers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import BENIGN, MALICIOUS, LabeledDataset, NormParams
from .errors import DimensionMismatch, EmptyDataset, ModelFormatError, SingleClass

VAR_FLOOR = 1e-9
MODEL_VERSION = 1


def _norm_json(p):
    return None if p is None else p.to_json()


def _norm_from(d):
    return None if d is None else NormParams.from_json(d)


# -- naive Bayes -------------------------------------------------------------

@dataclass(frozen=True)
class NbModel:
    priors: np.ndarray     # [benign, malicious]
    means: np.ndarray      # 2 x d
    variances: np.ndarray  # 2 x d, floored
    norm_params: Optional[NormParams] = None
    schema_id: str = "generic"
    feature_names: tuple = ()

    kind = "nb"

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def to_json(self) -> dict:
        return {"version": MODEL_VERSION, "kind": "nb", "priors": self.priors.tolist(),
                "means": self.means.tolist(), "variances": self.variances.tolist(),
                "norm_params": _norm_json(self.norm_params), "schema_id": self.schema_id,
                "feature_names": list(self.feature_names)}

    @classmethod
    def from_json(cls, d) -> "NbModel":
        if d.get("version") != MODEL_VERSION or d.get("kind") != "nb":
            raise ModelFormatError("not a version-1 naive Bayes model")
        return cls(np.asarray(d["priors"], float), np.asarray(d["means"], float),
                   np.asarray(d["variances"], float), _norm_from(d.get("norm_params")),
                   d.get("schema_id", "generic"), tuple(d.get("feature_names", ())))


def train_naive_bayes(ds: LabeledDataset, var_floor: float = VAR_FLOOR) -> NbModel:
    y = ds.y
    if len(y) == 0 or len(np.unique(y)) < 2:
        raise SingleClass("naive Bayes needs samples of both classes")
    means, variances, priors = [], [], []
    for label in (BENIGN, MALICIOUS):
        Xc = ds.X[y == label]
        priors.append(len(Xc) / len(y))
        means.append(Xc.mean(axis=0))
        variances.append(np.maximum(Xc.var(axis=0), var_floor))
    return NbModel(np.array(priors), np.array(means), np.array(variances),
                   ds.norm_params, ds.schema_id, tuple(ds.feature_names))


def nb_log_scores(m: NbModel, X) -> np.ndarray:
    """n x 2 array of log prior + sum of log Gaussian densities."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.dim:
        raise DimensionMismatch(f"model expects {m.dim} features, got {X.shape[1]}")
    out = np.empty((len(X), 2))
    for c in range(2):
        var = m.variances[c]
        ll = -0.5 * (np.log(2 * np.pi * var) + (X - m.means[c]) ** 2 / var)
        out[:, c] = np.log(m.priors[c]) + ll.sum(axis=1)
    return out


def nb_malicious_posterior(m: NbModel, X) -> np.ndarray:
    s = nb_log_scores(m, X)
    return 1.0 / (1.0 + np.exp(np.clip(s[:, 0] - s[:, 1], -700, 700)))


def predict_nb(m: NbModel, x) -> int:
    """Class with the larger log posterior; an exact tie is benign."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("predict_nb takes a single vector")
    s = nb_log_scores(m, x[None, :])[0]
    return MALICIOUS if s[1] > s[0] else BENIGN


def predict_nb_many(m: NbModel, X) -> np.ndarray:
    s = nb_log_scores(m, X)
    return np.where(s[:, 1] > s[:, 0], MALICIOUS, BENIGN)


# -- CART --------------------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    counts: tuple[int, int]  # (benign, malicious) training samples reaching the node
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def label(self) -> int:
        return MALICIOUS if self.counts[1] > self.counts[0] else BENIGN

    def to_json(self) -> dict:
        if self.is_leaf:
            return {"counts": list(self.counts)}
        return {"counts": list(self.counts), "feature": self.feature, "threshold": self.threshold,
                "left": self.left.to_json(), "right": self.right.to_json()}

    @classmethod
    def from_json(cls, d) -> "TreeNode":
        if "feature" not in d:
            return cls(tuple(d["counts"]))
        return cls(tuple(d["counts"]), int(d["feature"]), float(d["threshold"]),
                   cls.from_json(d["left"]), cls.from_json(d["right"]))


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    n_features: int
    max_depth: int
    min_leaf: int
    norm_params: Optional[NormParams] = None
    schema_id: str = "generic"
    feature_names: tuple = ()

    kind = "cart"

    @property
    def dim(self) -> int:
        return self.n_features

    def depth(self) -> int:
        def walk(n):
            return 0 if n.is_leaf else 1 + max(walk(n.left), walk(n.right))
        return walk(self.root)

    def to_json(self) -> dict:
        return {"version": MODEL_VERSION, "kind": "cart", "n_features": self.n_features,
                "max_depth": self.max_depth, "min_leaf": self.min_leaf, "tree": self.root.to_json(),
                "norm_params": _norm_json(self.norm_params), "schema_id": self.schema_id,
                "feature_names": list(self.feature_names)}

    @classmethod
    def from_json(cls, d) -> "TreeModel":
        if d.get("version") != MODEL_VERSION or d.get("kind") != "cart":
            raise ModelFormatError("not a version-1 CART model")
        return cls(TreeNode.from_json(d["tree"]), int(d["n_features"]), int(d["max_depth"]),
                   int(d["min_leaf"]), _norm_from(d.get("norm_params")),
                   d.get("schema_id", "generic"), tuple(d.get("feature_names", ())))


def _gini(n_b, n_m):
    n = n_b + n_m
    return 1.0 - ((n_b / n) ** 2 + (n_m / n) ** 2)


def _best_split(X, is_mal, min_leaf):
    """(weighted gini, feature, threshold) of the best split, or None."""
    n = len(is_mal)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_m = np.cumsum(is_mal[order])
        left_n = np.arange(1, n)
        # candidate boundaries: between distinct consecutive values, honouring min_leaf
        ok = (xs[1:] > xs[:-1]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
        if not ok.any():
            continue
        ln = left_n[ok].astype(float)
        lm = cum_m[:-1][ok].astype(float)
        rn = n - ln
        rm = cum_m[-1] - lm
        gl = 1.0 - ((lm / ln) ** 2 + ((ln - lm) / ln) ** 2)
        gr = 1.0 - ((rm / rn) ** 2 + ((rn - rm) / rn) ** 2)
        score = (ln * gl + rn * gr) / n
        k = int(np.argmin(score))
        if best is None or score[k] < best[0] - 1e-15:
            pos = np.flatnonzero(ok)[k]
            best = (float(score[k]), f, float((xs[pos] + xs[pos + 1]) / 2.0))
    return best


def train_cart(ds: LabeledDataset, max_depth: int = 8, min_leaf: int = 1) -> TreeModel:
    """Greedy Gini CART; stops on purity, depth, min_leaf, or no impurity decrease."""
    if len(ds) == 0:
        raise EmptyDataset("cannot grow a tree on an empty dataset")
    min_leaf = max(1, int(min_leaf))

    def grow(idx, depth):
        is_mal = (ds.y[idx] == MALICIOUS).astype(int)
        n_m = int(is_mal.sum())
        counts = (len(idx) - n_m, n_m)
        if n_m == 0 or n_m == len(idx) or depth >= max_depth:
            return TreeNode(counts)
        split = _best_split(ds.X[idx], is_mal, min_leaf)
        if split is None or split[0] >= _gini(*counts) - 1e-12:
            return TreeNode(counts)
        _, f, thr = split
        go_left = ds.X[idx, f] <= thr
        return TreeNode(counts, f, thr, grow(idx[go_left], depth + 1), grow(idx[~go_left], depth + 1))

    root = grow(np.arange(len(ds)), 0)
    return TreeModel(root, ds.dim, max_depth, min_leaf, ds.norm_params, ds.schema_id,
                     tuple(ds.feature_names))


def tree_leaf(m: TreeModel, x) -> TreeNode:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != m.n_features:
        raise DimensionMismatch(f"tree expects {m.n_features} features, got {x.shape}")
    node = m.root
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node


def predict_tree(m: TreeModel, x) -> int:
    return tree_leaf(m, x).label


def predict_tree_many(m: TreeModel, X) -> np.ndarray:
    return np.array([predict_tree(m, x) for x in np.atleast_2d(X)], dtype=int)


def tree_malicious_fraction(m: TreeModel, X) -> np.ndarray:
    out = []
    for x in np.atleast_2d(X):
        b, mal = tree_leaf(m, x).counts
        out.append(mal / (b + mal))
    return np.array(out)
