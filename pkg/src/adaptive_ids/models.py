"""Uniform handling of every classifier kind: fitting from a spec, alarm degrees, and JSON files.

Every model maps a raw (unscaled) feature matrix to an *alarm degree* in [0, 1]:

==========  ===============================================================
svm         ``(clip(f, -1, 1) + 1) / 2`` for decision value ``f``
nb          posterior probability of the malicious class
cart        fraction of malicious training samples in the reached leaf
fuzzy       centroid of the stand-alone fuzzy system
hybrid      centroid of the hybrid system fed with the SVM margin
==========  ===============================================================

A degree above 0.5 is a malicious verdict and ``|2d - 1|`` is its confidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import baselines, fuzzy, svm
from .dataset import (BENIGN, LIVE_SCHEMA, MALICIOUS, NSL_KDD_SCHEMA, LabeledDataset, NormParams,
                      apply_minmax, fit_minmax)
from .errors import ModelFormatError
from .fuzzy import FuzzyClassifier, FuzzySystem

CLASSIFIER_KINDS = ("svm", "nb", "cart", "fuzzy", "hybrid")
MODEL_VERSION = 1


@dataclass(frozen=True)
class HybridModel:
    """An SVM whose margin is post-processed by a fuzzy system."""

    svm: svm.SvmModel
    system: FuzzySystem

    kind = "hybrid"

    @property
    def norm_params(self):
        return self.svm.norm_params

    @property
    def feature_names(self):
        return self.svm.feature_names

    @property
    def schema_id(self):
        return self.svm.schema_id


Model = Union[svm.SvmModel, baselines.NbModel, baselines.TreeModel, FuzzyClassifier, HybridModel]


@dataclass(frozen=True)
class ClassifierSpec:
    """What to train. Text form: ``kind[:key=value,...]``, e.g. ``svm:c=1.57,gamma=0.58``."""

    kind: str
    c_param: float = svm.DEFAULT_C
    gamma_rbf: float = svm.DEFAULT_GAMMA
    max_depth: int = 8
    min_leaf: int = 1
    fuzzy_config: Optional[str] = None  # bundled name or a path; None picks one from the schema

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; expected one of {CLASSIFIER_KINDS}")

    _KEYS = {"c": ("c_param", float), "gamma": ("gamma_rbf", float), "depth": ("max_depth", int),
             "leaf": ("min_leaf", int), "config": ("fuzzy_config", str)}

    @classmethod
    def parse(cls, text: str) -> "ClassifierSpec":
        kind, _, rest = text.strip().partition(":")
        spec = cls(kind.lower())
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq or key.lower() not in cls._KEYS:
                raise ValueError(f"bad classifier option {item!r}")
            attr, conv = cls._KEYS[key.lower()]
            spec = replace(spec, **{attr: conv(value)})
        return spec

    def __str__(self):
        if self.kind == "svm":
            return f"svm:c={self.c_param:g},gamma={self.gamma_rbf:g}"
        if self.kind == "hybrid":
            return f"hybrid:c={self.c_param:g},gamma={self.gamma_rbf:g}"
        if self.kind == "cart":
            return f"cart:depth={self.max_depth},leaf={self.min_leaf}"
        return self.kind


def resolve_fuzzy_system(config: Optional[str], schema_id: str, hybrid: bool) -> FuzzySystem:
    """A config path, a bundled name, or (when ``config`` is None) the schema's default."""
    if config is None:
        if hybrid:
            config = "hybrid"
        elif schema_id == NSL_KDD_SCHEMA:
            config = "nslkdd"
        elif schema_id == LIVE_SCHEMA:
            config = "standalone"
        else:
            raise ValueError(f"no bundled fuzzy system for schema {schema_id!r}; pass a config")
    if Path(config).suffix == ".json" or Path(config).exists():
        return fuzzy.load_fuzzy_system(config)
    return fuzzy.bundled_system(config)


def fit_classifier(spec: ClassifierSpec, ds: LabeledDataset) -> Model:
    """Fit min-max scaling on ``ds`` (raw features) and train the requested model."""
    norm = fit_minmax(ds)
    scaled = ds.normalized(norm)
    if spec.kind == "svm":
        return svm.train_smo(scaled, spec.c_param, spec.gamma_rbf)
    if spec.kind == "hybrid":
        system = resolve_fuzzy_system(spec.fuzzy_config, ds.schema_id, hybrid=True)
        return HybridModel(svm.train_smo(scaled, spec.c_param, spec.gamma_rbf), system)
    if spec.kind == "nb":
        return baselines.train_naive_bayes(scaled)
    if spec.kind == "cart":
        return baselines.train_cart(scaled, spec.max_depth, spec.min_leaf)
    system = resolve_fuzzy_system(spec.fuzzy_config, ds.schema_id, hybrid=False)
    return FuzzyClassifier(system, tuple(ds.feature_names), norm, ds.schema_id)


def _scale(model, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    norm = model.norm_params
    return X if norm is None else apply_minmax(norm, X)


def margin_to_degree(f) -> np.ndarray:
    return (np.clip(f, -1.0, 1.0) + 1.0) / 2.0


def alarm_degrees(model: Model, X) -> np.ndarray:
    """Alarm degree in [0, 1] for each row of raw features ``X``."""
    Xs = _scale(model, X)
    if isinstance(model, svm.SvmModel):
        return margin_to_degree(svm.decision_values(model, Xs))
    if isinstance(model, baselines.NbModel):
        return baselines.nb_malicious_posterior(model, Xs)
    if isinstance(model, baselines.TreeModel):
        return baselines.tree_malicious_fraction(model, Xs)
    if isinstance(model, FuzzyClassifier):
        return np.array([model.degree(x) for x in Xs])
    if isinstance(model, HybridModel):
        margins = svm.decision_values(model.svm, Xs)
        out = np.empty(len(Xs))
        for i, (f, x) in enumerate(zip(margins, Xs)):
            aux = fuzzy.aux_inputs(model.system, x, model.feature_names)
            out[i] = fuzzy.hybrid_degree(f, model.system, aux)
        return out
    raise TypeError(f"not a model: {type(model).__name__}")


def predict_labels(model: Model, X) -> np.ndarray:
    """-1/+1 labels for raw features; a degree of exactly 0.5 is benign."""
    return np.where(alarm_degrees(model, X) > 0.5, MALICIOUS, BENIGN)


def verdicts(degrees) -> list[tuple[str, float]]:
    return [fuzzy.verdict_from_degree(float(d)) for d in np.atleast_1d(degrees)]


# -- files -------------------------------------------------------------------

def model_to_json(model: Model) -> dict:
    if isinstance(model, (svm.SvmModel, baselines.NbModel, baselines.TreeModel)):
        return model.to_json()
    if isinstance(model, FuzzyClassifier):
        return {"version": MODEL_VERSION, "kind": "fuzzy", "system": model.system.to_json(),
                "feature_names": list(model.feature_names), "schema_id": model.schema_id,
                "norm_params": None if model.norm_params is None else model.norm_params.to_json()}
    if isinstance(model, HybridModel):
        return {"version": MODEL_VERSION, "kind": "hybrid", "svm": model.svm.to_json(),
                "fuzzy": model.system.to_json()}
    raise TypeError(f"not a model: {type(model).__name__}")


def model_from_json(d: dict) -> Model:
    if not isinstance(d, dict):
        raise ModelFormatError("model file must hold a JSON object")
    kind = d.get("kind")
    if d.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {d.get('version')!r}")
    try:
        if kind == "svm":
            return svm.SvmModel.from_json(d)
        if kind == "nb":
            return baselines.NbModel.from_json(d)
        if kind == "cart":
            return baselines.TreeModel.from_json(d)
        if kind == "fuzzy":
            norm = d.get("norm_params")
            return FuzzyClassifier(FuzzySystem.from_json(d["system"]), tuple(d["feature_names"]),
                                   None if norm is None else NormParams.from_json(norm),
                                   d.get("schema_id", "generic"))
        if kind == "hybrid":
            return HybridModel(svm.SvmModel.from_json(d["svm"]), FuzzySystem.from_json(d["fuzzy"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed {kind} model: {exc}") from exc
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(model: Model, path, extra: Optional[dict] = None) -> None:
    """Write ``model`` as JSON; ``extra`` keys (e.g. tuning provenance) ride along untouched."""
    d = model_to_json(model)
    if extra:
        d = {**d, "meta": extra}
    Path(path).write_text(json.dumps(d, indent=1) + "\n", encoding="utf-8")


def load_model(path) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path} is not JSON: {exc}") from exc
    return model_from_json(d)
