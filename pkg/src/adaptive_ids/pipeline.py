"""Rule engine and adaptive plug-in running side by side, with alarm fusion.

Every frame is decoded once. The rule path scans each packet; the plug-in path
classifies each closed 1-second flow window. Rule hits are held until their
window closes and are then fused with that window's plug-in verdict:

(a) hits, plug-in benign with confidence >= theta_s  -> suppressed (audit record)
(b) hits otherwise                                   -> FUSED alarm per hit
(c) no hits, plug-in malicious with conf >= theta_a  -> PLUGIN anomaly alarm
(d) anything else                                    -> nothing

Without a plug-in every hit becomes a RULES alarm.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .dataset import LIVE_FEATURES, WINDOW_US, FlowWindow, FlowWindower, extract_flow_features, flow_key
from .errors import ArtifactLoadError, DecodeError, IdsError, TruthGap
from .evalmetrics import ConfusionMatrix
from .fuzzy import verdict_from_degree
from .models import HybridModel, Model, alarm_degrees, load_model, resolve_fuzzy_system
from .netmodel import RawFrame, decode_frame
from .rules import Category, RuleSet, scan
from .svm import SvmModel

PLUGIN_KINDS = ("svm", "fuzzy", "cart", "nb", "hybrid", "firefly_svm")
DEFAULT_THETA_S = 0.8
DEFAULT_THETA_A = 0.9
ANOMALY_CATEGORY = "anomaly"


class Source(str, enum.Enum):
    RULES = "RULES"
    PLUGIN = "PLUGIN"
    FUSED = "FUSED"


@dataclass(frozen=True)
class PluginSpec:
    kind: str
    model_path: Optional[str] = None
    fuzzy_config: Optional[str] = None
    suppress_threshold: float = DEFAULT_THETA_S
    anomaly_threshold: float = DEFAULT_THETA_A
    model: Optional[Model] = field(default=None, compare=False)  # an in-memory model skips the file

    def __post_init__(self):
        if self.kind not in PLUGIN_KINDS:
            raise ValueError(f"unknown plug-in kind {self.kind!r}; expected one of {PLUGIN_KINDS}")
        for name in ("suppress_threshold", "anomaly_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.01:
                raise ValueError(f"{name} must lie in [0, 1.01], got {v}")


@dataclass(frozen=True)
class Alarm:
    timestamp_us: int
    source: Source
    sid: Optional[int]
    category: str
    confidence: float
    flow_key: Optional[tuple]
    verdict: str = "malicious"
    suppressed_sids: tuple = ()

    def to_json(self) -> dict:
        return {"type": "alarm", "timestamp_us": self.timestamp_us, "source": self.source.value,
                "sid": self.sid, "category": self.category, "verdict": self.verdict,
                "confidence": self.confidence, "suppressed_sids": list(self.suppressed_sids),
                "flow_key": None if self.flow_key is None else list(self.flow_key)}

    @classmethod
    def from_json(cls, d) -> "Alarm":
        key = d.get("flow_key")
        return cls(int(d["timestamp_us"]), Source(d["source"]), d.get("sid"), d["category"],
                   float(d["confidence"]), None if key is None else tuple(key), d.get("verdict", "malicious"),
                   tuple(d.get("suppressed_sids", ())))


@dataclass(frozen=True)
class Suppression:
    """Audit record: rule hits in one window silenced by a confident benign verdict."""

    window_start_us: int
    flow_key: tuple
    hits: tuple  # ((timestamp_us, sid), ...)
    confidence: float

    @property
    def suppressed_sids(self) -> tuple:
        return tuple(sorted({sid for _, sid in self.hits}))

    def to_json(self) -> dict:
        return {"type": "suppression", "window_start_us": self.window_start_us, "flow_key": list(self.flow_key),
                "suppressed_sids": list(self.suppressed_sids), "hits": [list(h) for h in self.hits],
                "confidence": self.confidence}

    @classmethod
    def from_json(cls, d) -> "Suppression":
        return cls(int(d["window_start_us"]), tuple(d["flow_key"]), tuple(tuple(h) for h in d["hits"]),
                   float(d["confidence"]))


@dataclass(frozen=True)
class WindowVerdict:
    window_start_us: int
    flow_key: tuple
    packets: int
    rule_hits: int
    verdict: Optional[str] = None  # None when no plug-in ran
    confidence: Optional[float] = None

    def to_json(self) -> dict:
        return {"type": "window", "window_start_us": self.window_start_us, "flow_key": list(self.flow_key),
                "packets": self.packets, "rule_hits": self.rule_hits, "verdict": self.verdict,
                "confidence": self.confidence}

    @classmethod
    def from_json(cls, d) -> "WindowVerdict":
        return cls(int(d["window_start_us"]), tuple(d["flow_key"]), int(d["packets"]), int(d["rule_hits"]),
                   d.get("verdict"), d.get("confidence"))


@dataclass
class RunLog:
    alarms: list[Alarm] = field(default_factory=list)
    suppressions: list[Suppression] = field(default_factory=list)
    windows: list[WindowVerdict] = field(default_factory=list)
    frames: int = 0
    malformed: int = 0
    rule_hits: int = 0

    def totals(self) -> dict:
        by_source = {s.value: 0 for s in Source}
        for a in self.alarms:
            by_source[a.source.value] += 1
        return {"frames": self.frames, "malformed": self.malformed, "rule_hits": self.rule_hits,
                "alarms": len(self.alarms), "suppressed_hits": sum(len(s.hits) for s in self.suppressions),
                "windows": len(self.windows), **{f"alarms_{k.lower()}": v for k, v in by_source.items()}}

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for rec in self.alarms:
                f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            for rec in self.suppressions:
                f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            for rec in self.windows:
                f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            f.write(json.dumps({"type": "totals", **self.totals()}, sort_keys=True) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "RunLog":
        log = cls()
        with open(path, encoding="utf-8") as f:
            for n, line in enumerate(f, 1):
                if not line.strip():
                    continue
                d = json.loads(line)
                kind = d.get("type")
                if kind == "alarm":
                    log.alarms.append(Alarm.from_json(d))
                elif kind == "suppression":
                    log.suppressions.append(Suppression.from_json(d))
                elif kind == "window":
                    log.windows.append(WindowVerdict.from_json(d))
                elif kind == "totals":
                    log.frames, log.malformed, log.rule_hits = d["frames"], d["malformed"], d["rule_hits"]
                else:
                    raise ValueError(f"line {n}: unknown record type {kind!r}")
        return log


# -- fusion ------------------------------------------------------------------

class Decision(str, enum.Enum):
    SUPPRESS = "suppress"
    FUSED = "fused"
    ANOMALY = "anomaly"
    NONE = "none"


def fuse(rule_sids: Sequence[int], plugin_verdict: Optional[tuple[str, float]],
         theta_s: float = DEFAULT_THETA_S, theta_a: float = DEFAULT_THETA_A) -> Decision:
    verdict, conf = plugin_verdict if plugin_verdict is not None else (None, 0.0)
    if rule_sids:
        if verdict == "benign" and conf >= theta_s:
            return Decision.SUPPRESS
        return Decision.FUSED
    if verdict == "malicious" and conf >= theta_a:
        return Decision.ANOMALY
    return Decision.NONE


# -- pipeline ----------------------------------------------------------------

@dataclass
class Pipeline:
    ruleset: RuleSet
    plugin: Optional[PluginSpec] = None
    model: Optional[Model] = None
    span_us: int = WINDOW_US

    @property
    def has_plugin(self) -> bool:
        return self.model is not None


def _load_plugin_model(spec: PluginSpec) -> Model:
    model = spec.model
    if model is None:
        if spec.model_path is None:
            raise ArtifactLoadError(f"plug-in {spec.kind} needs a model file")
        if not Path(spec.model_path).is_file():
            raise ArtifactLoadError(f"model file not found: {spec.model_path}")
        try:
            model = load_model(spec.model_path)
        except IdsError as exc:
            raise ArtifactLoadError(f"cannot load {spec.model_path}: {exc}") from exc
    if spec.kind == "hybrid" and isinstance(model, SvmModel):
        try:
            system = resolve_fuzzy_system(spec.fuzzy_config, model.schema_id, hybrid=True)
        except (IdsError, OSError, ValueError) as exc:
            raise ArtifactLoadError(f"cannot load fuzzy config {spec.fuzzy_config}: {exc}") from exc
        model = HybridModel(model, system)
    expected = {"svm": "svm", "firefly_svm": "svm", "hybrid": "hybrid", "nb": "nb", "cart": "cart",
                "fuzzy": "fuzzy"}[spec.kind]
    if model.kind != expected:
        raise ArtifactLoadError(f"plug-in kind {spec.kind} needs a {expected} model, got {model.kind}")
    if tuple(model.feature_names) != LIVE_FEATURES:
        raise ArtifactLoadError("plug-in model was not trained on live flow features")
    return model


def build_pipeline(ruleset: RuleSet, plugin: Optional[PluginSpec] = None) -> Pipeline:
    model = None if plugin is None else _load_plugin_model(plugin)
    return Pipeline(ruleset, plugin, model)


def _window_verdicts(p: Pipeline, windows: Sequence[FlowWindow]) -> list[Optional[tuple[str, float]]]:
    if not p.has_plugin or not windows:
        return [None] * len(windows)
    X = np.array([extract_flow_features(w) for w in windows])
    return [verdict_from_degree(float(d)) for d in alarm_degrees(p.model, X)]


def process(p: Pipeline, frames: Iterable[RawFrame]) -> RunLog:
    log = RunLog()
    windower = FlowWindower(p.span_us)
    theta_s = p.plugin.suppress_threshold if p.plugin else DEFAULT_THETA_S
    theta_a = p.plugin.anomaly_threshold if p.plugin else DEFAULT_THETA_A
    emitted: list[tuple[int, int, Alarm]] = []  # (timestamp, arrival order, alarm)
    order = 0

    def rule_alarm(ts, sid, key, source, conf=1.0):
        nonlocal order
        rule = p.ruleset.get(sid)
        emitted.append((ts, order, Alarm(ts, source, sid, rule.category.value, conf, key)))
        order += 1

    def close(windows: list[FlowWindow]):
        nonlocal order
        for w, verdict in zip(windows, _window_verdicts(p, windows)):
            hits = [h for t in w.tags for h in t]
            log.windows.append(WindowVerdict(w.start_us, tuple(w.key), len(w.packets), len(hits),
                                             None if verdict is None else verdict[0],
                                             None if verdict is None else verdict[1]))
            if not p.has_plugin:
                for ts, sid in hits:
                    rule_alarm(ts, sid, tuple(w.key), Source.RULES)
                continue
            decision = fuse([sid for _, sid in hits], verdict, theta_s, theta_a)
            if decision is Decision.SUPPRESS:
                log.suppressions.append(Suppression(w.start_us, tuple(w.key), tuple(hits), verdict[1]))
            elif decision is Decision.FUSED:
                for ts, sid in hits:
                    rule_alarm(ts, sid, tuple(w.key), Source.FUSED, verdict[1] if verdict[0] == "malicious" else 1.0)
            elif decision is Decision.ANOMALY:
                ts = w.packets[0].timestamp_us
                emitted.append((ts, order, Alarm(ts, Source.PLUGIN, None, ANOMALY_CATEGORY, verdict[1],
                                                 tuple(w.key))))
                order += 1

    for frame in frames:
        log.frames += 1
        try:
            pkt = decode_frame(frame)
        except DecodeError:
            log.malformed += 1
            continue
        sids = scan(p.ruleset, pkt)
        log.rule_hits += len(sids)
        if flow_key(pkt) is None:
            # no window to classify: hits pass straight through
            for sid in sids:
                rule_alarm(pkt.timestamp_us, sid, None, Source.FUSED if p.has_plugin else Source.RULES)
            continue
        close(windower.add(pkt, tuple((pkt.timestamp_us, sid) for sid in sids)))
    close(windower.flush())
    emitted.sort(key=lambda e: (e[0], e[1]))
    log.alarms = [a for _, _, a in emitted]
    return log


# -- evaluation --------------------------------------------------------------

TABLE_CATEGORIES = tuple(c.value for c in Category if c is not Category.OTHER)


@dataclass
class CategoryRow:
    category: str
    counts: ConfusionMatrix

    @property
    def fpr(self) -> Optional[float]:
        return self.counts.fp / self.counts.N if self.counts.N else None

    @property
    def fnr(self) -> Optional[float]:
        return self.counts.fn / self.counts.P if self.counts.P else None

    def to_json(self) -> dict:
        return {"category": self.category, "fpr": self.fpr, "fnr": self.fnr, "counts": self.counts.to_json()}


@dataclass
class EvalTable:
    rows: list[CategoryRow]
    total: CategoryRow

    def row(self, category: str) -> CategoryRow:
        if category == self.total.category:
            return self.total
        for r in self.rows:
            if r.category == category:
                return r
        raise KeyError(category)

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "total": self.total.to_json()}

    def render(self, title: str = "") -> str:
        def cell(v):
            return "-" if v is None else f"{100.0 * v:.1f}"
        lines = [title] if title else []
        lines.append(f"{'Malicious Traffic':<18} {'FPR %':>7} {'FNR %':>7} {'windows':>8}")
        for r in self.rows + [self.total]:
            n = r.counts.P + r.counts.N
            lines.append(f"{r.category:<18} {cell(r.fpr):>7} {cell(r.fnr):>7} {n:>8}")
        return "\n".join(lines)


def evaluate_run(log: RunLog, truth, span_us: int = WINDOW_US) -> EvalTable:
    """Score alarms against per-window truth; Total pools every window."""
    gaps = [(w.window_start_us, w.flow_key) for w in log.windows
            if truth.get(w.window_start_us, w.flow_key) is None]
    if gaps:
        raise TruthGap(gaps)
    flagged = {(a.timestamp_us - a.timestamp_us % span_us, a.flow_key) for a in log.alarms
               if a.flow_key is not None}
    cells: dict[str, list[int]] = {}
    for rec in truth:
        alarmed = (rec.window_start_us, tuple(rec.flow_key)) in flagged
        c = cells.setdefault(rec.category, [0, 0, 0, 0])  # tp fp tn fn
        if rec.label == "malicious":
            c[0 if alarmed else 3] += 1
        else:
            c[1 if alarmed else 2] += 1
    order = list(TABLE_CATEGORIES) + sorted(set(cells) - set(TABLE_CATEGORIES))
    rows = [CategoryRow(cat, ConfusionMatrix(*cells[cat])) for cat in order if cat in cells]
    total = ConfusionMatrix()
    for r in rows:
        total = total + r.counts
    return EvalTable(rows, CategoryRow("Total", total))
