"""Seeded synthetic traffic: legitimate background streams, seven attack kinds, and ground truth.

A scenario is a list of streams. Each stream is generated on its own from a
sub-seed of the scenario seed, then all frames are merged by timestamp (ties
keep declaration order). Ground truth is computed by running the same
1-second flow windowing the detector uses over the merged timeline; a window
is malicious if any of its frames came from an attack stream.

Legitimate payloads are random printable bytes scrubbed of every content
pattern in the ruleset. A scenario then re-inserts contents from a small,
seeded selection of rules ("colliding" strings) into a fraction of legitimate
packets, which is what gives a signature-only detector its false positives.
"""

from __future__ import annotations

import ipaddress
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import netmodel as nm
from .dataset import WINDOW_US, FlowWindower
from .errors import InvalidSpec
from .netmodel import RawFrame
from .rules import Category, Rule, RuleSet, default_ruleset, match_rule

LEGIT_KINDS = ("legit_udp", "legit_tcp", "legit_icmp")
ATTACK_CATEGORY = {
    "atk_ssh": Category.SSH, "atk_dos": Category.DOS, "atk_ftp": Category.FTP,
    "atk_http": Category.HTTP, "atk_icmp": Category.ICMP, "atk_arp": Category.ARP,
    "atk_scan": Category.SCAN,
}
ATTACK_KINDS = tuple(ATTACK_CATEGORY)
STREAM_KINDS = LEGIT_KINDS + ATTACK_KINDS

# (rate pkt/s, count) used when a stream leaves them out
DEFAULT_RATE_COUNT = {
    "legit_udp": (500.0, 1000), "legit_tcp": (500.0, 1000), "legit_icmp": (1000.0, 2000),
    "atk_ssh": (200.0, 1600), "atk_dos": (5000.0, 20000), "atk_ftp": (200.0, 1600),
    "atk_http": (300.0, 2400), "atk_icmp": (3000.0, 12000), "atk_arp": (50.0, 400),
    "atk_scan": (500.0, 4000),
}
DEFAULT_PORT = {"legit_udp": 5001, "legit_tcp": 80, "atk_ssh": 22, "atk_ftp": 21, "atk_http": 80}
DEFAULT_ATTACK_PAYLOAD = {"atk_ssh": 120, "atk_dos": 48, "atk_ftp": 120, "atk_http": 120, "atk_icmp": 56,
                          "atk_arp": 0, "atk_scan": 0}
DEFAULT_HOSTS = {"atk_ssh": 2, "atk_dos": 20, "atk_ftp": 2, "atk_http": 3, "atk_icmp": 4,
                 "atk_arp": 1, "atk_scan": 1}

LEGIT_PAYLOAD = 1470
BASE_TIME_US = 1_700_000_000 * 1_000_000
JITTER = 0.01  # max timestamp jitter as a fraction of the inter-arrival time
SAFE_BYTE = ord("^")  # occurs in no bundled rule content


# -- specs -------------------------------------------------------------------

@dataclass(frozen=True)
class Endpoints:
    """Who talks to whom. Sources are the first ``hosts`` addresses of ``src_net``."""

    src_net: str = "10.1.0.0/24"
    hosts: int = 4
    dst: str = "192.168.10.10"
    dport: Optional[int] = None

    def sources(self) -> list[str]:
        net = ipaddress.ip_network(self.src_net, strict=False)
        addrs = [str(a) for a, _ in zip(net.hosts(), range(self.hosts))]
        if len(addrs) < self.hosts:
            raise InvalidSpec(f"{self.src_net} cannot hold {self.hosts} hosts")
        return addrs


@dataclass(frozen=True)
class StreamSpec:
    kind: str
    rate: Optional[float] = None
    count: Optional[int] = None
    start: float = 0.0  # seconds after the scenario start
    endpoints: Endpoints = field(default_factory=Endpoints)
    intensity: float = 1.0  # multiplies the packet rate
    category: Optional[str] = None  # reporting category for a legitimate stream's windows
    payload_size: Optional[int] = None  # legit: every payload; attacks: largest request payload
    collision_prob: float = 0.0  # per-packet chance that a legitimate packet carries a colliding string
    reply_ratio: float = 0.2  # legit_tcp / legit_icmp: share of packets sent server -> client
    session_len: Optional[float] = None  # legit_tcp: mean packets per connection (handshake included)
    host_skew: float = 0.0  # 0 spreads packets evenly over hosts; larger values make some hosts busier

    def __post_init__(self):
        if self.kind not in STREAM_KINDS:
            raise InvalidSpec(f"unknown stream kind {self.kind!r}")
        rate, count = self.effective_rate(), self.effective_count()
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidSpec(f"{self.kind}: rate must be > 0, got {rate}")
        if count <= 0:
            raise InvalidSpec(f"{self.kind}: count must be > 0, got {count}")
        if self.endpoints.hosts < 1:
            raise InvalidSpec("endpoints need at least one host")
        if not 0 <= self.collision_prob <= 1 or not 0 <= self.reply_ratio <= 1:
            raise InvalidSpec("probabilities must lie in [0, 1]")
        if self.start < 0:
            raise InvalidSpec("start offset must be >= 0")
        if self.payload_size is not None and self.payload_size < 0:
            raise InvalidSpec("payload_size must be >= 0")
        if self.session_len is not None and self.session_len < 5:
            raise InvalidSpec("session_len must be >= 5 (handshake, one data packet, FIN)")
        if self.host_skew < 0:
            raise InvalidSpec("host_skew must be >= 0")
        if self.category is not None:
            Category.parse(self.category)

    def effective_rate(self) -> float:
        rate = DEFAULT_RATE_COUNT[self.kind][0] if self.rate is None else float(self.rate)
        return rate * self.intensity

    def effective_payload(self) -> int:
        if self.payload_size is not None:
            return int(self.payload_size)
        return LEGIT_PAYLOAD if self.kind in LEGIT_KINDS else DEFAULT_ATTACK_PAYLOAD[self.kind]

    def effective_count(self) -> int:
        return DEFAULT_RATE_COUNT[self.kind][1] if self.count is None else int(self.count)

    @classmethod
    def from_json(cls, d: dict) -> "StreamSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown stream field(s): {', '.join(sorted(extra))}")
        if "kind" not in d:
            raise InvalidSpec("stream needs a 'kind'")
        d = dict(d)
        kind = d["kind"]
        ep = dict(d.pop("endpoints", {}) or {})
        if kind in DEFAULT_HOSTS:
            ep.setdefault("hosts", DEFAULT_HOSTS[kind])
        try:
            return cls(endpoints=Endpoints(**ep), **d)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from exc

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class ScenarioSpec:
    streams: tuple[StreamSpec, ...]
    seed: int = 0
    collision_fraction: float = 0.05  # share of content rules whose strings may appear in legit traffic
    name: str = ""

    def __post_init__(self):
        if not self.streams:
            raise InvalidSpec("a scenario needs at least one stream")
        if not 0 <= self.collision_fraction <= 1:
            raise InvalidSpec("collision_fraction must lie in [0, 1]")

    @classmethod
    def from_json(cls, d: dict) -> "ScenarioSpec":
        if not isinstance(d, dict) or "streams" not in d:
            raise InvalidSpec("scenario must be an object with a 'streams' list")
        return cls(tuple(StreamSpec.from_json(s) for s in d["streams"]), int(d.get("seed", 0)),
                   float(d.get("collision_fraction", 0.05)), str(d.get("name", "")))

    def to_json(self) -> dict:
        return {"name": self.name, "seed": self.seed, "collision_fraction": self.collision_fraction,
                "streams": [s.to_json() for s in self.streams]}


def load_scenario(path) -> ScenarioSpec:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpec(f"cannot read scenario {path}: {exc}") from exc
    return ScenarioSpec.from_json(d)


def bundled_scenario(name: str) -> ScenarioSpec:
    """``mixed_seed42`` (the evaluation scenario) or ``train_seed7`` (training traffic)."""
    from importlib import resources
    text = resources.files("adaptive_ids.data").joinpath(f"scenario_{name}.json").read_text("utf-8")
    return ScenarioSpec.from_json(json.loads(text))


# -- ground truth ------------------------------------------------------------

@dataclass(frozen=True)
class TruthRecord:
    window_start_us: int
    flow_key: tuple
    label: str  # "benign" or "malicious"
    category: str

    def to_json(self) -> dict:
        return {"window_start_us": self.window_start_us, "flow_key": list(self.flow_key),
                "label": self.label, "category": self.category}

    @classmethod
    def from_json(cls, d) -> "TruthRecord":
        if d.get("label") not in ("benign", "malicious"):
            raise ValueError(f"bad truth label {d.get('label')!r}")
        return cls(int(d["window_start_us"]), tuple(d["flow_key"]), d["label"], d["category"])


class GroundTruth:
    """Per-window labels keyed by (window_start_us, flow_key)."""

    def __init__(self, records: Iterable[TruthRecord] = ()):
        self.records: list[TruthRecord] = list(records)
        self._index = {(r.window_start_us, r.flow_key): r for r in self.records}
        if len(self._index) != len(self.records):
            raise ValueError("ground truth lists a window twice")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, start_us: int, key: tuple) -> Optional[TruthRecord]:
        return self._index.get((start_us, tuple(key)))

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for r in self.records:
                f.write(json.dumps(r.to_json(), sort_keys=True) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "GroundTruth":
        with open(path, encoding="utf-8") as f:
            return cls(TruthRecord.from_json(json.loads(line)) for line in f if line.strip())


def truth_from_frames(frames: Sequence[RawFrame], tags: Sequence[tuple[bool, str]]) -> GroundTruth:
    """Window the frames exactly as the detector will and label each window.

    ``tags[i]`` is ``(is_malicious, category)`` for ``frames[i]``. A window with
    any malicious frame takes the category of its first malicious frame.
    """
    windower = FlowWindower(WINDOW_US)
    records = []

    def label(windows):
        for w in windows:
            bad = [t for t in w.tags if t[0]]
            mal = bool(bad)
            records.append(TruthRecord(w.start_us, tuple(w.key), "malicious" if mal else "benign",
                                       (bad[0] if mal else w.tags[0])[1]))

    for fr, tag in zip(frames, tags):
        label(windower.add(nm.decode_frame(fr), tag))
    label(windower.flush())
    return GroundTruth(records)


# -- payloads ----------------------------------------------------------------

class Scrubber:
    """Removes accidental occurrences of any ruleset content from generated payloads.

    Works on lower-cased bytes (so it also catches case-insensitive contents):
    a numpy pass finds positions whose leading bytes start some pattern, and only
    those are verified. A hit is broken by overwriting its first byte with
    ``SAFE_BYTE``, which no pattern contains, so scrubbing never creates a match.
    """

    def __init__(self, ruleset: RuleSet):
        pats = {c.pattern.lower() for r in ruleset.rules for c in r.contents}
        if any(SAFE_BYTE in p for p in pats):
            raise ValueError("ruleset content contains the scrub byte")
        self.n = min([3] + [len(p) for p in pats])
        self.by_prefix: dict[int, list[bytes]] = {}
        for p in pats:
            self.by_prefix.setdefault(self._code(p[: self.n]), []).append(p)
        self.codes = np.array(sorted(self.by_prefix), dtype=np.int64)

    def _code(self, b: bytes) -> int:
        v = 0
        for ch in b:
            v = v * 256 + ch
        return v

    def clean(self, block: np.ndarray) -> np.ndarray:
        """Scrub a 2-D uint8 array of payload rows in place and return it."""
        if block.size == 0 or block.shape[1] < self.n or not len(self.codes):
            return block
        while True:
            low = np.where((block >= 65) & (block <= 90), block | 0x20, block).astype(np.int64)
            codes = low[:, : block.shape[1] - self.n + 1].copy()
            for k in range(1, self.n):
                codes = codes * 256 + low[:, k: block.shape[1] - self.n + 1 + k]
            rows, cols = np.nonzero(np.isin(codes, self.codes))
            changed = False
            for i, j in zip(rows.tolist(), cols.tolist()):
                row = low[i].astype(np.uint8).tobytes()
                if any(row.startswith(p, j) for p in self.by_prefix[int(codes[i, j])]):
                    block[i, j] = SAFE_BYTE
                    changed = True
            if not changed:
                return block


def printable_block(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    return rng.integers(32, 127, size=(n, size), dtype=np.uint8)


def embed(payload: bytearray, contents: Sequence[bytes], rng: np.random.Generator) -> None:
    """Write the contents back to back at a random offset (payload must be long enough)."""
    blob = b"".join(contents)
    if len(blob) > len(payload):
        payload[:] = blob
        return
    at = int(rng.integers(0, len(payload) - len(blob) + 1))
    payload[at: at + len(blob)] = blob


# -- helpers -----------------------------------------------------------------

def mac_for(ip: str, salt: int = 0) -> bytes:
    b = bytes(int(x) for x in ip.split("."))
    return bytes([0x02, salt & 0xFF]) + b


def _host_choice(rng, n_hosts: int, count: int, skew: float) -> np.ndarray:
    if skew <= 0 or n_hosts == 1:
        return rng.integers(0, n_hosts, count)
    weights = rng.dirichlet(np.full(n_hosts, 1.0 / skew))
    return rng.choice(n_hosts, size=count, p=weights)


def _session_roles(rng, host: np.ndarray, mean_len: Optional[float]) -> np.ndarray:
    """Per packet: 0 SYN, 1 SYN-ACK, 2 ACK, 3 data, 4 FIN (all data when ``mean_len`` is None)."""
    roles = np.full(len(host), 3, dtype=np.int8)
    if mean_len is None:
        return roles
    left: dict[int, int] = {}
    pos: dict[int, int] = {}
    for i, h in enumerate(host.tolist()):
        if left.get(h, 0) == 0:
            left[h] = 5 + int(rng.geometric(1.0 / max(mean_len - 4.0, 1.0))) - 1
            pos[h] = 0
        p = pos[h]
        roles[i] = p if p < 3 else (4 if left[h] == 1 else 3)
        pos[h] = p + 1
        left[h] -= 1
    return roles


def _timestamps(rng, start_us: int, rate: float, count: int, jitter: float = JITTER) -> np.ndarray:
    iat = 1e6 / rate
    base = start_us + np.arange(count) * iat
    jit = rng.uniform(-jitter, jitter, count) * iat
    ts = np.round(base + jit).astype(np.int64)
    return np.maximum.accumulate(ts)


def _rule_contents(rule: Rule) -> list[bytes]:
    return [c.pattern for c in rule.contents]


def _compatible(rules: Sequence[Rule], prototype) -> list[Rule]:
    """Rules that would fire on ``prototype(payload)`` once their contents are inside the payload."""
    out = []
    for r in rules:
        if not r.contents:
            continue
        blob = b"".join(_rule_contents(r))
        payload = blob + b"^" * max(0, 32 - len(blob))
        frame = RawFrame(0, prototype(payload))
        if match_rule(r, nm.decode_frame(frame)):
            out.append(r)
    return out


def select_colliding_rules(ruleset: RuleSet, fraction: float, rng: np.random.Generator) -> list[Rule]:
    """A seeded ``fraction`` of each category's content rules (at least one per category)."""
    chosen = []
    for cat in Category:
        pool = [r for r in ruleset.rules if r.category is cat and r.contents]
        if not pool or fraction <= 0:
            continue
        k = max(1, int(round(fraction * len(pool))))
        idx = np.sort(rng.choice(len(pool), size=min(k, len(pool)), replace=False))
        chosen.extend(pool[i] for i in idx)
    return chosen


@dataclass
class _Stream:
    frames: list[RawFrame]
    tags: list[tuple[bool, str]]


# -- legitimate streams ------------------------------------------------------

def _legit(spec: StreamSpec, rng: np.random.Generator, scrubber: Scrubber,
           colliding: Sequence[Rule], start_us: int) -> _Stream:
    kind = spec.kind
    if kind not in LEGIT_KINDS:
        raise InvalidSpec(f"{kind} is not a legitimate stream kind")
    ep = spec.endpoints
    srcs = ep.sources()
    dst = ep.dst
    dport = ep.dport if ep.dport is not None else DEFAULT_PORT.get(kind, 0)
    count = spec.effective_count()
    category = Category.parse(spec.category).value if spec.category else {
        "legit_udp": "DoS", "legit_tcp": "HTTP", "legit_icmp": "ICMP"}[kind]
    ts = _timestamps(rng, start_us, spec.effective_rate(), count)
    host = _host_choice(rng, len(srcs), count, spec.host_skew)
    payloads = scrubber.clean(printable_block(rng, count, spec.effective_payload()))
    collide = rng.random(count) < spec.collision_prob
    reply = rng.random(count) < (spec.reply_ratio if kind != "legit_udp" else 0.0)
    roles = _session_roles(rng, host, spec.session_len if kind == "legit_tcp" else None)
    sports = {h: 40000 + h for h in range(len(srcs))}
    tcp_role = {0: (nm.TCP_SYN, False), 1: (nm.TCP_SYN | nm.TCP_ACK, True), 2: (nm.TCP_ACK, False),
                4: (nm.TCP_FIN | nm.TCP_ACK, False)}

    def build(i_host: int, payload: bytes, is_reply: bool, seq: int, role: int = 3) -> bytes:
        src = srcs[i_host]
        sport = sports[i_host]
        flags = nm.TCP_PSH | nm.TCP_ACK
        if role != 3:
            flags, is_reply = tcp_role[role]
            payload = b""
        a, b = (dst, src) if is_reply else (src, dst)
        ma, mb = mac_for(a), mac_for(b)
        if kind == "legit_udp":
            return nm.udp_frame(ma, mb, a, b, sport, dport, payload)
        if kind == "legit_tcp":
            pa, pb = (dport, sport) if is_reply else (sport, dport)
            return nm.tcp_frame(ma, mb, a, b, pa, pb, flags, payload, seq=seq)
        return nm.icmp_frame(ma, mb, a, b, 0 if is_reply else 8, 0, payload, ident=i_host, seq=seq & 0xFFFF)

    candidates = _compatible(colliding, lambda p: build(0, p, False, 0)) if collide.any() else []
    frames = []
    for i in range(count):
        h, role = int(host[i]), int(roles[i])
        if role == 0:
            sports[h] = 32768 + int(rng.integers(0, 28000))
        payload = bytearray(payloads[i].tobytes())
        if collide[i] and candidates and role == 3:
            rule = candidates[int(rng.integers(len(candidates)))]
            embed(payload, _rule_contents(rule), rng)
        frames.append(RawFrame(int(ts[i]), build(h, bytes(payload), bool(reply[i]), i, role)))
    return _Stream(frames, [(False, category)] * count)


# -- attack streams ----------------------------------------------------------

def _category_rules(ruleset: RuleSet, cat: Category) -> list[Rule]:
    return [r for r in ruleset.rules if r.category is cat and r.contents]


def _attack(spec: StreamSpec, rng: np.random.Generator, scrubber: Scrubber, ruleset: RuleSet,
            start_us: int) -> _Stream:
    kind = spec.kind
    if kind not in ATTACK_KINDS:
        raise InvalidSpec(f"{kind} is not an attack kind")
    cat = ATTACK_CATEGORY[kind]
    ep = spec.endpoints
    srcs = ep.sources()
    dst = ep.dst
    count = spec.effective_count()
    ts = _timestamps(rng, start_us, spec.effective_rate(), count, jitter=0.2)
    pick = rng.integers(0, len(srcs), count)
    rules = _category_rules(ruleset, cat)
    big = spec.effective_payload()

    def short_payload(n_lo=24, n_hi=120) -> bytearray:
        size = int(rng.integers(n_lo, n_hi + 1))
        return bytearray(scrubber.clean(printable_block(rng, 1, size))[0].tobytes())

    def with_rule(proto_builder, payload: bytearray, usable: list[Rule]) -> bytes:
        if usable:
            embed(payload, _rule_contents(usable[int(rng.integers(len(usable)))]), rng)
        return proto_builder(bytes(payload))

    frames: list[RawFrame] = []

    if kind in ("atk_ssh", "atk_ftp", "atk_http"):
        # short TCP sessions: SYN, SYN-ACK, ACK, request carrying a rule string, reply, FIN
        dport = ep.dport if ep.dport is not None else DEFAULT_PORT[kind]
        usable = _compatible(rules, lambda p: nm.tcp_frame(mac_for(srcs[0]), mac_for(dst), srcs[0], dst,
                                                             40000, dport, nm.TCP_PSH | nm.TCP_ACK, p))
        pattern = [("c", nm.TCP_SYN, 0), ("s", nm.TCP_SYN | nm.TCP_ACK, 0), ("c", nm.TCP_ACK, 0),
                   ("c", nm.TCP_PSH | nm.TCP_ACK, 1), ("s", nm.TCP_PSH | nm.TCP_ACK, 2),
                   ("c", nm.TCP_FIN | nm.TCP_ACK, 0)]
        session_port: dict[int, int] = {}
        steps: dict[int, int] = {}
        for i in range(count):
            h = int(pick[i])
            step = steps.get(h, 0)
            steps[h] = (step + 1) % len(pattern)
            if step == 0:
                session_port[h] = 20000 + int(rng.integers(0, 40000))
            who, flags, data = pattern[step]
            src, sport = srcs[h], session_port[h]
            a, b, pa, pb = (src, dst, sport, dport) if who == "c" else (dst, src, dport, sport)
            build = (lambda p, a=a, b=b, pa=pa, pb=pb, flags=flags:
                     nm.tcp_frame(mac_for(a), mac_for(b), a, b, pa, pb, flags, p, seq=i))
            if data == 1:
                raw = with_rule(build, short_payload(24, max(24, big)), usable)
            elif data == 2:
                raw = build(bytes(short_payload(16, 64)))
            else:
                raw = build(b"")
            frames.append(RawFrame(int(ts[i]), raw))

    elif kind == "atk_dos":
        # spoofed sources flooding one victim with small UDP datagrams carrying DDoS-tool markers
        dport = ep.dport if ep.dport is not None else 7
        usable = _compatible(rules, lambda p: nm.udp_frame(mac_for(srcs[0]), mac_for(dst), srcs[0], dst,
                                                             1024, dport, p))
        for i in range(count):
            src = srcs[int(pick[i])]
            sport = 1024 + int(rng.integers(0, 60000))
            raw = with_rule(lambda p, src=src, sport=sport: nm.udp_frame(mac_for(src, 7), mac_for(dst),
                                                                        src, dst, sport, dport, p),
                            short_payload(16, max(16, big)), usable)
            frames.append(RawFrame(int(ts[i]), raw))

    elif kind == "atk_icmp":
        usable = _compatible(rules, lambda p: nm.icmp_frame(mac_for(srcs[0]), mac_for(dst), srcs[0], dst,
                                                              8, 0, p))
        for i in range(count):
            src = srcs[int(pick[i])]
            raw = with_rule(lambda p, src=src: nm.icmp_frame(mac_for(src), mac_for(dst), src, dst, 8, 0, p,
                                                             ident=int(pick[i]), seq=i & 0xFFFF),
                            short_payload(8, max(8, big)), usable)
            frames.append(RawFrame(int(ts[i]), raw))

    elif kind == "atk_scan":
        # SYNs with no payload from one source, walking the destination ports
        src = srcs[0]
        first_port = int(rng.integers(1, 1024))
        for i in range(count):
            src_i = srcs[int(pick[i])]
            port = (first_port + i) % 65535 + 1
            raw = nm.tcp_frame(mac_for(src_i), mac_for(dst), src_i, dst, 45000 + int(pick[i]), port,
                               nm.TCP_SYN, b"", seq=i)
            frames.append(RawFrame(int(ts[i]), raw))

    else:  # atk_arp: gratuitous replies binding the victim address to rotating forged MACs
        victim = dst
        macs = [bytes([0x02, 0xBA, 0xD0, 0x00, 0x00, k + 1]) for k in range(max(2, int(round(2 * spec.intensity))))]
        for i in range(count):
            mac = macs[i % len(macs)]
            raw = nm.arp_frame(mac, b"\xff" * 6, 2, mac, victim, b"\xff" * 6, victim)
            frames.append(RawFrame(int(ts[i]), raw))

    return _Stream(frames, [(True, cat.value)] * count)


# -- public API --------------------------------------------------------------

def _rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_legit(kind: str, rate: float, count: int, seed: int, *, start_us: int = BASE_TIME_US,
              endpoints: Optional[Endpoints] = None, payload_size: Optional[int] = None,
              category: Optional[str] = None, collision_prob: float = 0.0,
              colliding: Sequence[Rule] = (), ruleset: Optional[RuleSet] = None):
    """Constant-rate legitimate traffic. Returns (frames, GroundTruth)."""
    if kind not in LEGIT_KINDS:
        raise InvalidSpec(f"{kind!r} is not a legitimate stream kind")
    spec = StreamSpec(kind, rate, count, endpoints=endpoints or Endpoints(), category=category,
                      payload_size=payload_size, collision_prob=collision_prob)
    rs = ruleset or default_ruleset()
    s = _legit(spec, _rng_from(seed), Scrubber(rs), colliding, start_us)
    return s.frames, truth_from_frames(s.frames, s.tags)


def gen_attack(kind: str, intensity: float = 1.0, seed: int = 0, *, rate: Optional[float] = None,
               count: Optional[int] = None, start_us: int = BASE_TIME_US,
               endpoints: Optional[Endpoints] = None, ruleset: Optional[RuleSet] = None):
    """One attack stream with its kind's default shape. Returns (frames, GroundTruth)."""
    if kind not in ATTACK_KINDS:
        raise InvalidSpec(f"{kind!r} is not an attack kind")
    ep = endpoints or Endpoints(src_net="172.16.0.0/16", hosts=DEFAULT_HOSTS[kind])
    spec = StreamSpec(kind, rate, count, endpoints=ep, intensity=intensity)
    rs = ruleset or default_ruleset()
    s = _attack(spec, _rng_from(seed), Scrubber(rs), rs, start_us)
    return s.frames, truth_from_frames(s.frames, s.tags)


def mix(spec: ScenarioSpec, ruleset: Optional[RuleSet] = None):
    """Generate every stream of the scenario and merge them. Returns (frames, GroundTruth)."""
    rs = ruleset or default_ruleset()
    scrubber = Scrubber(rs)
    seeds = np.random.SeedSequence(spec.seed).spawn(len(spec.streams) + 1)
    colliding = select_colliding_rules(rs, spec.collision_fraction, _rng_from(seeds[0]))
    streams = []
    for s, ss in zip(spec.streams, seeds[1:]):
        start = BASE_TIME_US + int(round(s.start * 1e6))
        if s.kind in LEGIT_KINDS:
            streams.append(_legit(s, _rng_from(ss), scrubber, colliding, start))
        else:
            streams.append(_attack(s, _rng_from(ss), scrubber, rs, start))
    order = sorted(((fr.timestamp_us, si, fi) for si, st in enumerate(streams)
                    for fi, fr in enumerate(st.frames)))
    frames = [streams[si].frames[fi] for _, si, fi in order]
    tags = [streams[si].tags[fi] for _, si, fi in order]
    return frames, truth_from_frames(frames, tags)


def write_outputs(frames: Sequence[RawFrame], truth: GroundTruth, pcap_path, truth_path) -> None:
    nm.write_pcap(pcap_path, frames)
    truth.write_jsonl(truth_path)


def feature_dataset(frames: Iterable[RawFrame], truth: GroundTruth):
    """Live flow features of every window, labelled from ``truth`` (the training-set builder)."""
    from .dataset import BENIGN, MALICIOUS, dataset_from_windows
    from .errors import DecodeError, TruthGap

    windower = FlowWindower(WINDOW_US)
    windows = []
    for fr in frames:
        try:
            pkt = nm.decode_frame(fr)
        except DecodeError:
            continue
        windows.extend(windower.add(pkt))
    windows.extend(windower.flush())
    labels, missing = [], []
    for w in windows:
        rec = truth.get(w.start_us, tuple(w.key))
        if rec is None:
            missing.append((w.start_us, tuple(w.key)))
            continue
        labels.append(MALICIOUS if rec.label == "malicious" else BENIGN)
    if missing:
        raise TruthGap(missing)
    return dataset_from_windows(windows, labels)
