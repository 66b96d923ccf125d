"""Feature vectors, labelled datasets, min-max scaling and stratified folds.

Two feature schemas exist:

* ``live-flow-v1``: 12 statistics computed over a flow window of decoded packets
  (see ``LIVE_FEATURES``);
* ``nsl-kdd-41``: the 41 NSL-KDD connection features, read from CSV.

Labels are always encoded as -1 (benign) and +1 (malicious).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (ColumnCountMismatch, DataError, DimensionMismatch, EmptyDataset, EmptyFile,
                     EmptyWindow, NonFiniteFeature, TooFewSamples, UnparsableNumber)
from .netmodel import TCP_ACK, TCP_SYN, DecodedPacket, Proto

BENIGN = -1
MALICIOUS = 1

LIVE_SCHEMA = "live-flow-v1"
LIVE_FEATURES = (
    "packet_count", "byte_count", "mean_packet_size", "packet_rate", "tcp_syn_ratio",
    "tcp_flag_entropy", "unique_dst_ports", "icmp_ratio", "arp_ratio",
    "mean_payload_entropy", "mean_interarrival_us", "direction_ratio",
)

NSL_KDD_SCHEMA = "nsl-kdd-41"
NSL_KDD_FEATURES = (
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
    "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
    "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
    "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
)
NSL_KDD_SYMBOLIC = (1, 2, 3)

WINDOW_US = 1_000_000
MIN_SPAN_US = 1_000


@dataclass(frozen=True)
class NormParams:
    lo: np.ndarray
    hi: np.ndarray

    def to_json(self) -> dict:
        return {"min": [float(v) for v in self.lo], "max": [float(v) for v in self.hi]}

    @classmethod
    def from_json(cls, d) -> "NormParams":
        return cls(np.asarray(d["min"], dtype=float), np.asarray(d["max"], dtype=float))


@dataclass
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    schema_id: str = "generic"
    norm_params: Optional[NormParams] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2:
            self.X = self.X.reshape(len(self.y), -1)
        if len(self.X) != len(self.y):
            raise DimensionMismatch(f"{len(self.X)} samples but {len(self.y)} labels")
        if self.X.shape[1] != len(self.feature_names) and len(self.y):
            raise DimensionMismatch(f"{self.X.shape[1]} columns but {len(self.feature_names)} feature names")
        if len(self.y) and not np.all(np.isin(self.y, (BENIGN, MALICIOUS))):
            raise DataError("labels must be -1 (benign) or +1 (malicious)")
        if not np.all(np.isfinite(self.X)):
            raise NonFiniteFeature("dataset contains NaN or infinite feature values")

    def __len__(self):
        return len(self.y)

    @property
    def dim(self) -> int:
        return len(self.feature_names)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=int)
        return LabeledDataset(self.X[idx], self.y[idx], self.feature_names, self.schema_id, self.norm_params)

    def normalized(self, params: "NormParams") -> "LabeledDataset":
        return LabeledDataset(apply_minmax(params, self.X), self.y, self.feature_names,
                              self.schema_id, params)


# -- flow windows ------------------------------------------------------------

FlowKey = tuple  # (src_ip, dst_ip, proto-name)


@dataclass(frozen=True)
class FlowWindow:
    key: FlowKey
    start_us: int
    packets: tuple[DecodedPacket, ...]
    span_us: int = WINDOW_US
    tags: tuple = field(default=(), compare=False)


def flow_key(pkt: DecodedPacket) -> Optional[FlowKey]:
    if pkt.src_ip is None:
        return None
    return (pkt.src_ip, pkt.dst_ip, pkt.proto.value)


class FlowWindower:
    """Tumbling windows aligned to multiples of ``span_us``.

    Windows are bidirectional: a reply (dst -> src) joins the window opened by
    the first packet of the pair, whose orientation becomes the window key.
    Packets without IPv4 addresses are not windowed.
    """

    def __init__(self, span_us: int = WINDOW_US):
        self.span_us = span_us
        self._period: Optional[int] = None
        self._open: dict[tuple, list] = {}

    def add(self, pkt: DecodedPacket, tag=None) -> list[FlowWindow]:
        """Add a packet; return the windows closed by its arrival (possibly none)."""
        key = flow_key(pkt)
        if key is None:
            return []
        period = pkt.timestamp_us - pkt.timestamp_us % self.span_us
        closed = []
        if self._period is None:
            self._period = period
        elif period > self._period:
            closed = self.flush()
            self._period = period
        elif period < self._period:
            raise ValueError("packets must be added in timestamp order")
        pair = (min(key[0], key[1]), max(key[0], key[1]), key[2])
        slot = self._open.get(pair)
        if slot is None:
            slot = self._open[pair] = [key, [], []]
        slot[1].append(pkt)
        slot[2].append(tag)
        return closed

    def window_of(self, pkt: DecodedPacket) -> Optional[tuple[int, FlowKey]]:
        """(start, key) of the open window that holds ``pkt``'s flow."""
        key = flow_key(pkt)
        if key is None:
            return None
        slot = self._open.get((min(key[0], key[1]), max(key[0], key[1]), key[2]))
        return None if slot is None else (self._period, slot[0])

    def flush(self) -> list[FlowWindow]:
        out = [FlowWindow(k, self._period, tuple(p), self.span_us, tuple(t))
               for k, p, t in self._open.values()]
        self._open = {}
        return out


def group_windows(packets: Iterable[DecodedPacket], span_us: int = WINDOW_US) -> list[FlowWindow]:
    w = FlowWindower(span_us)
    out = []
    for p in packets:
        out.extend(w.add(p))
    out.extend(w.flush())
    return out


def _entropy(counts) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def payload_entropy(payload: bytes) -> float:
    """Shannon entropy of the byte distribution, in bits per byte."""
    if not payload:
        return 0.0
    counts = np.bincount(np.frombuffer(payload, dtype=np.uint8), minlength=256)
    p = counts[counts > 0] / len(payload)
    return float(-(p * np.log2(p)).sum())


def extract_flow_features(window: FlowWindow) -> np.ndarray:
    """The 12 ``LIVE_FEATURES`` of one window, in declared order."""
    pkts = window.packets
    n = len(pkts)
    if n == 0:
        raise EmptyWindow("cannot extract features from an empty window")
    sizes = [p.frame_len for p in pkts]
    byte_count = float(sum(sizes))
    span = max(window.span_us, MIN_SPAN_US)
    syn = 0
    flag_counts: dict[int, int] = {}
    dports = set()
    icmp = arp = forward = 0
    ent_sum = 0.0
    src = window.key[0]
    for p in pkts:
        if p.proto is Proto.TCP:
            flags = p.tcp_flags
            flag_counts[flags] = flag_counts.get(flags, 0) + 1
            if flags & TCP_SYN and not flags & TCP_ACK:
                syn += 1
        elif p.proto is Proto.ICMP:
            icmp += 1
        elif p.proto is Proto.ARP:
            arp += 1
        if p.dst_port is not None:
            dports.add(p.dst_port)
        if p.src_ip == src:
            forward += 1
        ent_sum += payload_entropy(p.payload)
    ts = [p.timestamp_us for p in pkts]
    iat = (ts[-1] - ts[0]) / (n - 1) if n > 1 else 0.0
    return np.array([
        n, byte_count, byte_count / n, n * 1e6 / span, syn / n,
        _entropy(flag_counts.values()), len(dports), icmp / n, arp / n,
        ent_sum / n, iat, forward / n,
    ], dtype=float)


def dataset_from_windows(windows: Sequence[FlowWindow], labels: Sequence[int]) -> LabeledDataset:
    X = np.array([extract_flow_features(w) for w in windows], dtype=float).reshape(len(windows), len(LIVE_FEATURES))
    return LabeledDataset(X, np.asarray(labels, dtype=int), LIVE_FEATURES, LIVE_SCHEMA)


# -- CSV ---------------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_labeled_csv(path, format: str = "generic") -> LabeledDataset:
    """Load an NSL-KDD (``nsl_kdd``) or all-numeric (``generic``) labelled CSV."""
    with open(path, newline="", encoding="utf-8") as f:
        rows = [r for r in csv.reader(f) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyFile(f"{path} contains no rows")
    if format == "nsl_kdd":
        return _load_nsl_kdd(rows)
    if format == "generic":
        return _load_generic(rows)
    raise ValueError(f"unknown CSV format {format!r}")


def _load_nsl_kdd(rows) -> LabeledDataset:
    codes = {i: {} for i in NSL_KDD_SYMBOLIC}
    X = np.empty((len(rows), 41))
    y = np.empty(len(rows), dtype=int)
    for r, row in enumerate(rows, 1):
        if len(row) not in (42, 43):
            raise ColumnCountMismatch(r, "42 or 43", len(row))
        for c in range(41):
            text = row[c].strip()
            if c in codes:
                X[r - 1, c] = codes[c].setdefault(text, len(codes[c]))
                continue
            try:
                X[r - 1, c] = float(text)
            except ValueError:
                raise UnparsableNumber(r, c + 1, text) from None
        label = row[41].strip().rstrip(".").lower()
        y[r - 1] = BENIGN if label == "normal" else MALICIOUS
    return LabeledDataset(X, y, NSL_KDD_FEATURES, NSL_KDD_SCHEMA)


def _load_generic(rows) -> LabeledDataset:
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
        if not rows:
            raise EmptyFile("generic CSV has a header but no data rows")
    width = len(header) if header else len(rows[0])
    if width < 2:
        raise ColumnCountMismatch(1, ">= 2", width)
    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows), dtype=int)
    first = 2 if header else 1
    for i, row in enumerate(rows):
        r = i + first
        if len(row) != width:
            raise ColumnCountMismatch(r, width, len(row))
        for c, text in enumerate(row):
            try:
                v = float(text)
            except ValueError:
                raise UnparsableNumber(r, c + 1, text.strip()) from None
            if c < width - 1:
                X[i, c] = v
            elif v in (1.0,):
                y[i] = MALICIOUS
            elif v in (-1.0, 0.0):
                y[i] = BENIGN
            else:
                raise DataError(f"row {r}: label {text!r} is not one of -1, 0, +1")
    names = tuple(header[:-1]) if header else tuple(f"f{i}" for i in range(width - 1))
    schema = LIVE_SCHEMA if names == LIVE_FEATURES else "generic"
    return LabeledDataset(X, y, names, schema)


def save_generic_csv(ds: LabeledDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(list(ds.feature_names) + ["label"])
        for x, label in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in x] + [int(label)])


# -- scaling -----------------------------------------------------------------

def fit_minmax(ds) -> NormParams:
    """Column-wise min and max of a dataset (or a 2-D array)."""
    X = ds.X if isinstance(ds, LabeledDataset) else np.asarray(ds, dtype=float)
    if X.size == 0 or len(X) == 0:
        raise EmptyDataset("cannot fit min-max scaling on an empty dataset")
    return NormParams(X.min(axis=0), X.max(axis=0))


def apply_minmax(p: NormParams, v) -> np.ndarray:
    """Scale to [0, 1] and clamp; constant columns map to 0. Accepts a vector or a matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != len(p.lo):
        raise DimensionMismatch(f"vector has {v.shape[-1]} features, scaling expects {len(p.lo)}")
    rng = p.hi - p.lo
    safe = np.where(rng > 0, rng, 1.0)
    out = np.clip((v - p.lo) / safe, 0.0, 1.0)
    return np.where(rng > 0, out, 0.0)


# -- folds -------------------------------------------------------------------

def stratified_kfold(ds, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """k (train, test) index pairs with class-balanced, near-equal test folds.

    Each class is shuffled with ``seed`` and dealt round-robin; the second class
    continues where the first stopped, so fold sizes differ by at most one.
    """
    y = ds.y if isinstance(ds, LabeledDataset) else np.asarray(ds)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    order = []
    for label in (BENIGN, MALICIOUS):
        idx = np.flatnonzero(y == label)
        if len(idx) < k:
            raise TooFewSamples(f"class {label:+d} has {len(idx)} samples, fewer than k={k}")
        order.append(rng.permutation(idx))
    dealt = np.concatenate(order)
    fold_of = np.arange(len(dealt)) % k
    n = len(y)
    folds = []
    for f in range(k):
        test = np.sort(dealt[fold_of == f])
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        folds.append((np.flatnonzero(mask), test))
    return folds
