"""Confusion counts, the five detection metrics, and the k-fold runner.

Positive class is always malicious (+1). ``detection_rate`` and
``detection_accuracy`` accept any non-negative inputs because reports feed
them fold-averaged rates rather than rates from a single matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .dataset import MALICIOUS, LabeledDataset, NormParams, stratified_kfold
from .errors import EmptyInput, LengthMismatch, UndefinedRate


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def P(self) -> int:
        return self.tp + self.fn

    @property
    def N(self) -> int:
        return self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(truth: Sequence[int], pred: Sequence[int]) -> ConfusionMatrix:
    t = np.asarray(truth)
    p = np.asarray(pred)
    if len(t) != len(p):
        raise LengthMismatch(f"truth has {len(t)} labels, predictions {len(p)}")
    if len(t) == 0:
        raise EmptyInput("cannot build a confusion matrix from zero samples")
    tpos = t == MALICIOUS
    ppos = p == MALICIOUS
    return ConfusionMatrix(int(np.sum(tpos & ppos)), int(np.sum(~tpos & ppos)),
                           int(np.sum(~tpos & ~ppos)), int(np.sum(tpos & ~ppos)))


def rates(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """(tpr, fpr, fnr)."""
    if cm.P == 0:
        raise UndefinedRate("P")
    if cm.N == 0:
        raise UndefinedRate("N")
    return cm.tp / cm.P, cm.fp / cm.N, cm.fn / cm.P


def detection_rate(tpr: float, fnr: float) -> float:
    """TPR / (TPR + FNR)."""
    denom = tpr + fnr
    if denom <= 0:
        raise UndefinedRate("DR")
    return tpr / denom


def detection_accuracy(tpr: float, fnr: float, fpr: float) -> float:
    """(TPR + FNR) / (TPR + FNR + FPR)."""
    denom = tpr + fnr + fpr
    if denom <= 0:
        raise UndefinedRate("DA")
    return (tpr + fnr) / denom


@dataclass
class MetricsReport:
    tpr: float
    fpr: float
    fnr: float
    dr: float
    da: float
    counts: ConfusionMatrix
    per_category: Optional[dict] = None

    @classmethod
    def from_rates(cls, tpr, fpr, fnr, counts: ConfusionMatrix) -> "MetricsReport":
        return cls(float(tpr), float(fpr), float(fnr), detection_rate(tpr, fnr),
                   detection_accuracy(tpr, fnr, fpr), counts)

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "MetricsReport":
        return cls.from_rates(*rates(cm), cm)

    def to_json(self) -> dict:
        d = {"tpr": self.tpr, "fpr": self.fpr, "fnr": self.fnr, "dr": self.dr, "da": self.da,
             "counts": self.counts.to_json()}
        if self.per_category is not None:
            d["per_category"] = {k: v.to_json() for k, v in self.per_category.items()}
        return d

    def summary(self) -> str:
        """One row in the ``DR 96.8%, FPR 0.7%, DA 95.6%`` style."""
        return f"DR {pct(self.dr)}, FPR {pct(self.fpr)}, DA {pct(self.da)}"


def pct(v: float) -> str:
    return f"{100.0 * v:.1f}%"


def format_summary_table(rows: Mapping[str, MetricsReport]) -> str:
    """Per-classifier DR / FPR / DA table, percentages to one decimal."""
    width = max([len("Algorithm")] + [len(k) for k in rows])
    lines = [f"{'Algorithm':<{width}}  {'DR':>7}  {'FPR':>7}  {'DA':>7}"]
    for name, r in rows.items():
        lines.append(f"{name:<{width}}  {pct(r.dr):>7}  {pct(r.fpr):>7}  {pct(r.da):>7}")
    return "\n".join(lines)


# -- cross validation --------------------------------------------------------

@dataclass
class CvResult:
    """Fold-averaged report plus everything needed to audit each fold."""

    report: MetricsReport
    folds: list[MetricsReport]
    fold_norms: list[NormParams] = field(repr=False)
    spec: str = ""
    k: int = 10
    seed: int = 0

    def to_json(self) -> dict:
        return {"spec": self.spec, "k": self.k, "seed": self.seed, **self.report.to_json(),
                "folds": [f.to_json() for f in self.folds]}


def cross_validate(ds: LabeledDataset, spec, k: int = 10, seed: int = 0) -> CvResult:
    """Stratified k-fold CV; scaling is fitted on each training split only.

    ``spec`` is a ``ClassifierSpec`` or its text form. The aggregate report holds
    the mean of the per-fold TPR/FPR/FNR, with DR and DA computed from those
    means; its counts are the fold sums.
    """
    from .models import ClassifierSpec, fit_classifier, predict_labels

    if isinstance(spec, str):
        spec = ClassifierSpec.parse(spec)
    folds, norms = [], []
    total = ConfusionMatrix()
    for train_idx, test_idx in stratified_kfold(ds, k, seed):
        model = fit_classifier(spec, ds.subset(train_idx))
        test = ds.subset(test_idx)
        cm = confusion(test.y, predict_labels(model, test.X))
        folds.append(MetricsReport.from_confusion(cm))
        norms.append(model.norm_params)
        total = total + cm
    mean = [float(np.mean([getattr(f, r) for f in folds])) for r in ("tpr", "fpr", "fnr")]
    report = MetricsReport.from_rates(*mean, total)
    return CvResult(report, folds, norms, str(spec), k, seed)
