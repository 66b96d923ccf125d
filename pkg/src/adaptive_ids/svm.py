"""Soft-margin RBF support vector machine trained with SMO.

The trainer solves the dual of the soft-margin problem

    max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0

two multipliers at a time. The working pair is the maximal violator ``i``
plus the partner ``j`` with the largest second-order gain; ties go to the
lowest index, so training is fully deterministic. Optimisation stops when the
KKT gap ``max_{I_up} -y G - min_{I_low} -y G`` drops below ``kkt_tol``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist

from .dataset import BENIGN, MALICIOUS, LabeledDataset, NormParams, apply_minmax, fit_minmax
from .errors import DimensionMismatch, ModelFormatError, NonFiniteFeature, SingleClass

log = logging.getLogger(__name__)

DEFAULT_C = 1.0
DEFAULT_GAMMA = 0.1
DEFAULT_KKT_TOL = 1e-3
MODEL_VERSION = 1

_TAU = 1e-12


def rbf_kernel(a, b, gamma_rbf: float) -> float:
    """exp(-gamma * ||a - b||^2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"kernel arguments have shapes {a.shape} and {b.shape}")
    if gamma_rbf < 0:
        raise ValueError("gamma_rbf must be >= 0")
    d = a - b
    return float(np.exp(-gamma_rbf * float(d @ d)))


def sq_distances(A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]}-d vectors against {B.shape[1]}-d vectors")
    return cdist(A, B, "sqeuclidean")


def rbf_matrix(A, B, gamma_rbf: float) -> np.ndarray:
    return np.exp(-gamma_rbf * sq_distances(A, B))


@njit(cache=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        # maximal violator in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        # second-order partner in I_low
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                if i >= 0:
                    b = gmax - v
                    if b > 0:
                        a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if a <= 0:
                            a = _TAU
                        gain = -(b * b) / a
                        if gain < best:
                            best = gain
                            j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            break
        it += 1

        yi = y[i]
        yj = y[j]
        Qij = yi * yj * K[i, j]
        old_i = alpha[i]
        old_j = alpha[j]
        if yi != yj:
            quad = K[i, i] + K[j, j] + 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(n):
            G[t] += y[t] * (yi * K[t, i] * di + yj * K[t, j] * dj)

    # intercept: average over free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(n):
        yG = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            nfree += 1
            sfree += yG
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = (ub + lb) / 2.0
    return alpha, rho, it


def solve_dual(K: np.ndarray, y: np.ndarray, c_param: float, kkt_tol: float = DEFAULT_KKT_TOL,
               max_iter: Optional[int] = None):
    """Run SMO on a precomputed kernel matrix. Returns (alpha, bias, iterations)."""
    y = np.asarray(y, dtype=float)
    if max_iter is None:
        max_iter = 100 * len(y)
    alpha, rho, it = _smo(np.ascontiguousarray(K, dtype=float), y, float(c_param),
                          float(kkt_tol), int(max_iter))
    if it >= max_iter:
        log.warning("SMO stopped at the iteration limit (%d) before reaching kkt_tol", max_iter)
    return alpha, -rho, it


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    coeffs: np.ndarray  # alpha_i * y_i
    bias: float
    gamma_rbf: float
    c_param: float
    norm_params: Optional[NormParams] = None
    schema_id: str = "generic"
    feature_names: tuple = ()
    iterations: int = field(default=0, compare=False)

    kind = "svm"

    def __post_init__(self):
        if len(self.coeffs) != len(self.support_vectors):
            raise ValueError("coeffs and support_vectors differ in length")
        if len(self.coeffs) == 0:
            raise ValueError("a model needs at least one support vector")

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def alphas(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def to_json(self) -> dict:
        return {
            "version": MODEL_VERSION, "kind": "svm",
            "c_param": self.c_param, "gamma_rbf": self.gamma_rbf, "bias": self.bias,
            "schema_id": self.schema_id, "feature_names": list(self.feature_names),
            "norm_params": None if self.norm_params is None else self.norm_params.to_json(),
            "support_vectors": self.support_vectors.tolist(), "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "SvmModel":
        if d.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {d.get('version')!r}")
        if d.get("kind", "svm") != "svm":
            raise ModelFormatError(f"expected an svm model, got {d.get('kind')!r}")
        try:
            norm = d.get("norm_params")
            return cls(np.asarray(d["support_vectors"], dtype=float).reshape(len(d["coeffs"]), -1),
                       np.asarray(d["coeffs"], dtype=float), float(d["bias"]),
                       float(d["gamma_rbf"]), float(d["c_param"]),
                       None if norm is None else NormParams.from_json(norm),
                       d.get("schema_id", "generic"), tuple(d.get("feature_names", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed svm model: {exc}") from exc


def _check_trainable(ds: LabeledDataset):
    if not np.all(np.isfinite(ds.X)):
        raise NonFiniteFeature("training data contains NaN or infinite values")
    if len(ds) == 0 or len(np.unique(ds.y)) < 2:
        raise SingleClass("training data must contain both benign and malicious samples")


def train_smo(ds: LabeledDataset, c_param: float = DEFAULT_C, gamma_rbf: float = DEFAULT_GAMMA,
              kkt_tol: float = DEFAULT_KKT_TOL, max_passes: Optional[int] = None) -> SvmModel:
    """Train on ``ds`` as given (scale it first; its ``norm_params`` are copied into the model)."""
    _check_trainable(ds)
    if c_param <= 0:
        raise ValueError("c_param must be > 0")
    y = ds.y.astype(float)
    K = rbf_matrix(ds.X, ds.X, gamma_rbf)
    alpha, bias, it = solve_dual(K, y, c_param, kkt_tol, max_passes)
    sv = alpha > 0
    return SvmModel(ds.X[sv].copy(), alpha[sv] * y[sv], float(bias), float(gamma_rbf), float(c_param),
                    ds.norm_params, ds.schema_id, tuple(ds.feature_names), it)


def fit_svm(ds: LabeledDataset, c_param: float = DEFAULT_C, gamma_rbf: float = DEFAULT_GAMMA,
            kkt_tol: float = DEFAULT_KKT_TOL, max_passes: Optional[int] = None) -> SvmModel:
    """Fit min-max scaling on raw ``ds``, then train."""
    norm = fit_minmax(ds)
    return train_smo(ds.normalized(norm), c_param, gamma_rbf, kkt_tol, max_passes)


def decision_values(m: SvmModel, X) -> np.ndarray:
    """Vectorised decision function for rows of already-scaled ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.dim:
        raise DimensionMismatch(f"model expects {m.dim} features, got {X.shape[1]}")
    return rbf_matrix(X, m.support_vectors, m.gamma_rbf) @ m.coeffs + m.bias


def decision_value(m: SvmModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("decision_value takes a single vector")
    return float(decision_values(m, x[None, :])[0])


def predict(m: SvmModel, x) -> int:
    """Sign of the decision value; an exact zero is benign."""
    return MALICIOUS if decision_value(m, x) > 0 else BENIGN


def predict_many(m: SvmModel, X) -> np.ndarray:
    return np.where(decision_values(m, X) > 0, MALICIOUS, BENIGN)


def scale_input(m, x) -> np.ndarray:
    """Apply the model's stored scaling (identity when the model has none)."""
    return np.asarray(x, dtype=float) if m.norm_params is None else apply_minmax(m.norm_params, x)


def dual_objective(m: SvmModel) -> float:
    """sum(alpha) - 1/2 alpha^T Q alpha, evaluated on the retained vectors."""
    K = rbf_matrix(m.support_vectors, m.support_vectors, m.gamma_rbf)
    return float(np.abs(m.coeffs).sum() - 0.5 * m.coeffs @ K @ m.coeffs)


def kkt_violations(m: SvmModel, ds: LabeledDataset) -> np.ndarray:
    """Per-sample KKT violation of the trained model on its (scaled) training set."""
    f = decision_values(m, ds.X)
    yf = ds.y * f
    alpha = np.zeros(len(ds))
    # map support vectors back onto training rows
    sv_index = {row.tobytes(): a for row, a in zip(m.support_vectors, np.abs(m.coeffs))}
    for i, row in enumerate(ds.X):
        alpha[i] = sv_index.get(row.tobytes(), 0.0)
    C = m.c_param
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~at_zero & ~at_c
    v = np.zeros(len(ds))
    v[at_zero] = np.maximum(0.0, 1 - yf[at_zero])
    v[at_c] = np.maximum(0.0, yf[at_c] - 1)
    v[free] = np.abs(yf[free] - 1)
    return v
