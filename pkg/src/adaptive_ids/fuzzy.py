"""Mamdani fuzzy inference (min activation, max aggregation, centroid).

Used two ways:

* ``FuzzyClassifier``: the stand-alone classifier; its input variables read
  scaled feature columns directly;
* ``hybrid_classify``: post-processes an SVM decision value (the ``margin``
  input) together with auxiliary traffic inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional

import numpy as np

from .errors import MissingInput, ModelFormatError

GRID = np.linspace(0.0, 1.0, 101)
MARGIN_CLAMP = 3.0
CONFIG_VERSION = 1


@dataclass(frozen=True)
class MembershipFn:
    """Triangle with feet ``a``, ``c`` and peak ``b``.

    ``a == b`` makes a left shoulder (1 for every x <= b); ``b == c`` a right
    shoulder (1 for every x >= b).
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c):
            raise ValueError(f"membership function needs a <= b <= c, got {self.a, self.b, self.c}")

    def __call__(self, x: float) -> float:
        return fuzzify(x, self)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        out = np.zeros_like(xs, dtype=float)
        if b > a:
            rising = (xs > a) & (xs < b)
            out[rising] = (xs[rising] - a) / (b - a)
        else:
            out[xs <= b] = 1.0
        if c > b:
            falling = (xs > b) & (xs < c)
            out[falling] = (c - xs[falling]) / (c - b)
        else:
            out[xs >= b] = 1.0
        out[xs == b] = 1.0
        return out


def fuzzify(x: float, mf: MembershipFn) -> float:
    a, b, c = mf.a, mf.b, mf.c
    if x == b:
        return 1.0
    if x < b:
        if a == b:
            return 1.0
        return (x - a) / (b - a) if x > a else 0.0
    if b == c:
        return 1.0
    return (c - x) / (c - b) if x < c else 0.0


@dataclass(frozen=True)
class Variable:
    name: str
    universe: tuple[float, float]
    terms: Mapping[str, MembershipFn]
    feature: Optional[str] = None  # feature column feeding this input, if any


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: tuple[tuple[str, str], ...]  # conjunction of (variable, term)
    consequent: str


@dataclass(frozen=True)
class FuzzySystem:
    inputs: Mapping[str, Variable]
    output_terms: Mapping[str, MembershipFn]
    rules: tuple[FuzzyRule, ...]
    output_name: str = "alarm"
    _sampled: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.rules:
            raise ValueError("a fuzzy system needs at least one rule")
        for r in self.rules:
            if r.consequent not in self.output_terms:
                raise ValueError(f"rule consequent {r.consequent!r} is not an output term")
            for var, term in r.antecedent:
                if var not in self.inputs:
                    raise ValueError(f"rule references undeclared variable {var!r}")
                if term not in self.inputs[var].terms:
                    raise ValueError(f"variable {var!r} has no term {term!r}")
        object.__setattr__(self, "_sampled",
                           {name: mf.sample(GRID) for name, mf in self.output_terms.items()})

    # -- config I/O --

    @classmethod
    def from_json(cls, d: dict) -> "FuzzySystem":
        if d.get("version") != CONFIG_VERSION:
            raise ModelFormatError(f"unsupported fuzzy config version {d.get('version')!r}")
        try:
            inputs = {
                name: Variable(name, tuple(v["universe"]),
                               {t: MembershipFn(*abc) for t, abc in v["terms"].items()},
                               v.get("feature"))
                for name, v in d["inputs"].items()
            }
            out = d["output"]
            rules = tuple(FuzzyRule(tuple((a[0], a[1]) for a in r["if"]), r["then"]) for r in d["rules"])
            return cls(inputs, {t: MembershipFn(*abc) for t, abc in out["terms"].items()}, rules,
                       out.get("name", "alarm"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed fuzzy config: {exc}") from exc

    def to_json(self) -> dict:
        def mf(m):
            return [m.a, m.b, m.c]
        inputs = {}
        for name, v in self.inputs.items():
            entry = {"universe": list(v.universe), "terms": {t: mf(m) for t, m in v.terms.items()}}
            if v.feature:
                entry["feature"] = v.feature
            inputs[name] = entry
        return {"version": CONFIG_VERSION, "inputs": inputs,
                "output": {"name": self.output_name, "universe": [0.0, 1.0],
                           "terms": {t: mf(m) for t, m in self.output_terms.items()}},
                "rules": [{"if": [list(a) for a in r.antecedent], "then": r.consequent} for r in self.rules]}


def load_fuzzy_system(path) -> FuzzySystem:
    with open(path, encoding="utf-8") as f:
        return FuzzySystem.from_json(json.load(f))


def bundled_system(name: str) -> FuzzySystem:
    """Load a shipped config: ``hybrid``, ``standalone`` or ``nslkdd``."""
    text = resources.files("adaptive_ids.data").joinpath(f"fuzzy_{name}.json").read_text("utf-8")
    return FuzzySystem.from_json(json.loads(text))


def infer(sys: FuzzySystem, inputs: Mapping[str, float]) -> np.ndarray:
    """Aggregated output membership sampled on the 101-point grid over [0, 1]."""
    missing = [v for v in sys.inputs if v not in inputs]
    if missing:
        raise MissingInput(f"missing fuzzy input(s): {', '.join(missing)}")
    agg = np.zeros_like(GRID)
    for r in sys.rules:
        strength = min(fuzzify(float(inputs[var]), sys.inputs[var].terms[term]) for var, term in r.antecedent)
        if strength > 0:
            np.maximum(agg, np.minimum(sys._sampled[r.consequent], strength), out=agg)
    return agg


def defuzzify_centroid(agg) -> float:
    """Centre of gravity over the grid; an all-zero aggregate gives 0.5."""
    mu = np.asarray(agg, dtype=float)
    total = mu.sum()
    if total <= 0:
        return 0.5
    d = float((GRID * mu).sum() / total)
    # absorb rounding so symmetric aggregates land exactly on the neutral point
    return 0.5 if abs(d - 0.5) < 1e-9 else d


def verdict_from_degree(d: float) -> tuple[str, float]:
    """Map an alarm degree to (verdict, confidence); 0.5 itself is benign."""
    return ("malicious" if d > 0.5 else "benign"), abs(d - 0.5) * 2.0


def hybrid_degree(margin: float, sys: FuzzySystem, aux: Mapping[str, float]) -> float:
    inputs = dict(aux)
    inputs["margin"] = float(np.clip(margin, -MARGIN_CLAMP, MARGIN_CLAMP))
    return defuzzify_centroid(infer(sys, inputs))


def hybrid_classify(m, sys: FuzzySystem, x, aux: Mapping[str, float]) -> tuple[str, float]:
    """SVM margin post-processed by fuzzy rules. ``x`` must already be scaled."""
    from .svm import decision_value

    if "margin" not in sys.inputs:
        raise MissingInput("hybrid fuzzy system must declare a 'margin' input")
    return verdict_from_degree(hybrid_degree(decision_value(m, x), sys, aux))


def aux_inputs(sys: FuzzySystem, x, feature_names) -> dict[str, float]:
    """Read every non-margin input from the scaled feature vector via its ``feature`` mapping."""
    index = {n: i for i, n in enumerate(feature_names)}
    out = {}
    for name, var in sys.inputs.items():
        if name == "margin":
            continue
        col = var.feature or name
        if col not in index:
            raise MissingInput(f"fuzzy input {name!r} needs feature {col!r}, which the schema lacks")
        out[name] = float(x[index[col]])
    return out


@dataclass(frozen=True)
class FuzzyClassifier:
    """Stand-alone fuzzy classifier over scaled features (no training beyond scaling)."""

    system: FuzzySystem
    feature_names: tuple
    norm_params: Optional[object] = None
    schema_id: str = "generic"

    kind = "fuzzy"

    def degree(self, x) -> float:
        return defuzzify_centroid(infer(self.system, aux_inputs(self.system, x, self.feature_names)))

    def predict(self, x) -> int:
        return 1 if self.degree(x) > 0.5 else -1
