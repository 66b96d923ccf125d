"""Snort-subset signature rules: parsing, rule files and packet matching.

Grammar (one rule per logical line)::

    action proto src_addr src_port -> dst_addr dst_port (option; option; ...)

Recognised options are ``msg``, ``content`` (optionally followed by
``nocase``), ``sid``, ``rev`` and ``classtype``. Any other option is kept in
``Rule.options`` and ignored by matching.
"""

from __future__ import annotations

import enum
import functools
import ipaddress
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .errors import DuplicateSid, MissingSid, RuleSyntaxError
from .netmodel import DecodedPacket, Proto


class Category(str, enum.Enum):
    SSH = "SSH"
    DOS = "DoS"
    FTP = "FTP"
    HTTP = "HTTP"
    ICMP = "ICMP"
    ARP = "ARP"
    SCAN = "SCAN"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, name: str) -> "Category":
        key = name.strip().upper()
        if key in ("DOS", "DDOS", "DOS/DDOS"):
            return cls.DOS
        for c in cls:
            if c.value.upper() == key:
                return c
        raise ValueError(f"unknown category {name!r}")


ACTIONS = ("alert",)
PROTOCOLS = ("tcp", "udp", "icmp", "ip", "arp", "http")

_PROTO_MATCHES = {
    "tcp": frozenset({Proto.TCP}),
    "udp": frozenset({Proto.UDP}),
    "icmp": frozenset({Proto.ICMP}),
    "ip": frozenset({Proto.TCP, Proto.UDP, Proto.ICMP, Proto.OTHER_IP}),
    "arp": frozenset({Proto.ARP}),
    "http": frozenset({Proto.TCP}),
}


@dataclass(frozen=True)
class AddrSpec:
    network: Optional[ipaddress.IPv4Network] = None  # None means "any"

    @property
    def is_any(self) -> bool:
        return self.network is None

    def matches(self, ip: Optional[str]) -> bool:
        if self.network is None:
            return True
        if ip is None:
            return False
        n = _ip_int(ip)
        return (n & self._mask) == self._net

    @functools.cached_property
    def _mask(self) -> int:
        return int(self.network.netmask)

    @functools.cached_property
    def _net(self) -> int:
        return int(self.network.network_address)

    def __str__(self):
        return "any" if self.network is None else str(self.network).removesuffix("/32")


@dataclass(frozen=True)
class PortSpec:
    lo: int = 0
    hi: int = 65535
    is_any: bool = True

    def matches(self, port: Optional[int]) -> bool:
        if self.is_any:
            return True
        return port is not None and self.lo <= port <= self.hi

    @property
    def single(self) -> Optional[int]:
        return self.lo if not self.is_any and self.lo == self.hi else None

    def __str__(self):
        if self.is_any:
            return "any"
        return str(self.lo) if self.lo == self.hi else f"{self.lo}:{self.hi}"


ANY_ADDR = AddrSpec()
ANY_PORT = PortSpec()


@dataclass(frozen=True)
class Content:
    pattern: bytes
    nocase: bool = False


@dataclass(frozen=True)
class Rule:
    action: str
    proto: str
    src_addr: AddrSpec
    src_port: PortSpec
    dst_addr: AddrSpec
    dst_port: PortSpec
    sid: int
    rev: int = 1
    msg: str = ""
    contents: tuple[Content, ...] = ()
    classtype: Optional[str] = None
    category: Category = Category.OTHER
    options: tuple[tuple[str, Optional[str]], ...] = ()  # unrecognised, kept verbatim
    direction: str = "->"

    def __post_init__(self):
        if self.sid < 1:
            raise ValueError("sid must be >= 1")
        if any(not c.pattern for c in self.contents):
            raise ValueError("content patterns must be non-empty")


@functools.lru_cache(maxsize=65536)
def _ip_int(ip: str) -> int:
    return int(ipaddress.IPv4Address(ip))


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\S+")


def _parse_addr(tok: str, col: int) -> AddrSpec:
    if tok.lower() == "any":
        return ANY_ADDR
    try:
        return AddrSpec(ipaddress.IPv4Network(tok, strict=False))
    except ValueError:
        raise RuleSyntaxError(f"bad address {tok!r}", col) from None


def _parse_port(tok: str, col: int) -> PortSpec:
    if tok.lower() == "any":
        return ANY_PORT
    m = re.fullmatch(r"(\d*)(:?)(\d*)", tok)
    if not m or (not m.group(2) and not m.group(1)) or tok == ":":
        raise RuleSyntaxError(f"bad port {tok!r}", col)
    a, colon, b = m.groups()
    if not colon:
        lo = hi = int(a)
    else:
        lo = int(a) if a else 0
        hi = int(b) if b else 65535
    if not (0 <= lo <= hi <= 65535):
        raise RuleSyntaxError(f"port range {tok!r} out of bounds", col)
    return PortSpec(lo, hi, False)


def _decode_content(text: str, col: int) -> bytes:
    """Turn a content string (with ``|hex|`` runs) into bytes."""
    out = bytearray()
    parts = text.split("|")
    if len(parts) % 2 == 0:
        raise RuleSyntaxError("unbalanced '|' in content", col)
    for i, part in enumerate(parts):
        if i % 2 == 0:
            out += part.encode("utf-8")
        else:
            hexdigits = part.replace(" ", "")
            if len(hexdigits) % 2 or not re.fullmatch(r"[0-9A-Fa-f]*", hexdigits):
                raise RuleSyntaxError(f"bad hex run |{part}| in content", col)
            out += bytes.fromhex(hexdigits)
    return bytes(out)


def _split_options(body: str, base_col: int) -> list[tuple[str, Optional[str], int]]:
    """Split ``name:value; name; ...`` honouring quotes and backslash escapes."""
    opts = []
    i, n = 0, len(body)
    while i < n:
        while i < n and body[i].isspace():
            i += 1
        if i >= n:
            break
        start = i
        while i < n and body[i] not in ":;":
            i += 1
        name = body[start:i].strip()
        col = base_col + start
        if not name:
            raise RuleSyntaxError("empty option name", col)
        if i >= n or body[i] == ";":
            opts.append((name, None, col))
            i += 1
            continue
        i += 1  # ':'
        while i < n and body[i].isspace():
            i += 1
        if i < n and body[i] == '"':
            i += 1
            buf = []
            while i < n and body[i] != '"':
                if body[i] == "\\" and i + 1 < n:
                    i += 1
                buf.append(body[i])
                i += 1
            if i >= n:
                raise RuleSyntaxError(f"unterminated string in option {name!r}", col)
            i += 1
            value = "".join(buf)
            while i < n and body[i].isspace():
                i += 1
            if i < n and body[i] != ";":
                raise RuleSyntaxError(f"expected ';' after option {name!r}", base_col + i)
            i += 1
            opts.append((name, '"' + value, col))  # leading quote marks a quoted value
        else:
            start = i
            while i < n and body[i] != ";":
                i += 1
            opts.append((name, body[start:i].strip(), col))
            i += 1
    return opts


def parse_rule(line: str, category: Category = Category.OTHER) -> Rule:
    """Parse one rule. Columns in RuleSyntaxError are 1-based."""
    text = line.rstrip()
    open_paren = text.find("(")
    if open_paren < 0:
        raise RuleSyntaxError("missing '(' option block", len(text) + 1)
    if not text.endswith(")"):
        raise RuleSyntaxError("missing closing ')'", len(text) + 1)
    tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text[:open_paren])]
    if len(tokens) != 7:
        col = tokens[-1][1] if tokens else 1
        raise RuleSyntaxError(f"rule header needs 7 fields, got {len(tokens)}", col)
    (action, ca), (proto, cp), (saddr, csa), (sport, csp), (arrow, cd), (daddr, cda), (dport, cdp) = tokens
    if action not in ACTIONS:
        raise RuleSyntaxError(f"unsupported action {action!r}", ca)
    proto = proto.lower()
    if proto not in PROTOCOLS:
        raise RuleSyntaxError(f"unsupported protocol {proto!r}", cp)
    if arrow != "->":
        raise RuleSyntaxError(f"unsupported direction {arrow!r}", cd)

    msg, sid, rev, classtype = "", None, 1, None
    contents: list[Content] = []
    extra = []
    for name, value, col in _split_options(text[open_paren + 1:-1], open_paren + 2):
        key = name.lower()
        quoted = value is not None and value.startswith('"')
        raw = value[1:] if quoted else value
        if key == "msg":
            msg = raw or ""
        elif key == "content":
            if not quoted:
                raise RuleSyntaxError("content must be a quoted string", col)
            pattern = _decode_content(raw, col)
            if not pattern:
                raise RuleSyntaxError("empty content pattern", col)
            contents.append(Content(pattern))
        elif key == "nocase":
            if not contents:
                raise RuleSyntaxError("nocase without a preceding content", col)
            contents[-1] = Content(contents[-1].pattern, True)
        elif key in ("sid", "rev"):
            if raw is None or not raw.isdigit() or int(raw) < 1:
                raise RuleSyntaxError(f"{key} must be a positive integer", col)
            if key == "sid":
                sid = int(raw)
            else:
                rev = int(raw)
        elif key == "classtype":
            classtype = raw
        else:
            extra.append((name, value if not quoted else '"' + raw + '"'))
    if sid is None:
        raise MissingSid(f"rule has no sid: {text[:60]}")
    return Rule(action=action, proto=proto,
                src_addr=_parse_addr(saddr, csa), src_port=_parse_port(sport, csp),
                dst_addr=_parse_addr(daddr, cda), dst_port=_parse_port(dport, cdp),
                sid=sid, rev=rev, msg=msg, contents=tuple(contents), classtype=classtype,
                category=category, options=tuple(extra))


def _quote(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace(";", "\\;")


def _content_text(b: bytes) -> str:
    out, hexrun = [], []
    for byte in b:
        ch = chr(byte)
        if 0x20 <= byte < 0x7F and ch not in '|"\\;':
            if hexrun:
                out.append("|" + " ".join(hexrun) + "|")
                hexrun = []
            out.append(ch)
        else:
            hexrun.append(f"{byte:02X}")
    if hexrun:
        out.append("|" + " ".join(hexrun) + "|")
    return "".join(out)


def format_rule(rule: Rule) -> str:
    """Render a rule back into rule-file syntax (parse_rule round-trips it)."""
    opts = [f'msg:"{_quote(rule.msg)}"']
    for c in rule.contents:
        opts.append(f'content:"{_content_text(c.pattern)}"')
        if c.nocase:
            opts.append("nocase")
    if rule.classtype:
        opts.append(f"classtype:{rule.classtype}")
    for name, value in rule.options:
        opts.append(name if value is None else f"{name}:{value}")
    opts += [f"sid:{rule.sid}", f"rev:{rule.rev}"]
    return (f"{rule.action} {rule.proto} {rule.src_addr} {rule.src_port} -> "
            f"{rule.dst_addr} {rule.dst_port} ({'; '.join(opts)};)")


# -- rule sets ---------------------------------------------------------------

_CATEGORY_DIRECTIVE = re.compile(r"#\s*category\s*:\s*(.+?)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            if r.sid in seen:
                raise DuplicateSid(f"duplicate sid {r.sid}")
            seen.add(r.sid)
        object.__setattr__(self, "_index", _build_index(self.rules))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    @property
    def by_category(self) -> dict[Category, int]:
        counts = Counter(r.category for r in self.rules)
        return {c: counts[c] for c in Category if counts[c]}

    def get(self, sid: int) -> Optional[Rule]:
        return self._index["by_sid"].get(sid)


def parse_ruleset(text: str) -> RuleSet:
    """Parse a rule file. ``# category: NAME`` applies to the rules that follow it."""
    category = Category.OTHER
    rules = []
    seen: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _CATEGORY_DIRECTIVE.match(stripped)
            if m:
                try:
                    category = Category.parse(m.group(1))
                except ValueError as exc:
                    raise RuleSyntaxError(str(exc), 1, lineno) from None
            continue
        try:
            rule = parse_rule(line, category)
        except RuleSyntaxError as exc:
            raise exc.with_line(lineno) from None
        except MissingSid as exc:
            raise MissingSid(f"line {lineno}: {exc}") from None
        if rule.sid in seen:
            raise DuplicateSid(f"line {lineno}: sid {rule.sid} already defined on line {seen[rule.sid]}")
        seen[rule.sid] = lineno
        rules.append(rule)
    return RuleSet(tuple(rules))


def load_ruleset(path) -> RuleSet:
    with open(path, encoding="utf-8") as f:
        return parse_ruleset(f.read())


def default_ruleset() -> RuleSet:
    """The bundled category ruleset."""
    text = resources.files("adaptive_ids.data").joinpath("default.rules").read_text("utf-8")
    return parse_ruleset(text)


# -- matching ----------------------------------------------------------------

def _matches(rule: Rule, pkt: DecodedPacket, lowered: Optional[bytes]) -> bool:
    if pkt.proto not in _PROTO_MATCHES[rule.proto]:
        return False
    if not (rule.src_addr.matches(pkt.src_ip) and rule.dst_addr.matches(pkt.dst_ip)):
        return False
    if not (rule.src_port.is_any and rule.dst_port.is_any):
        if not pkt.has_ports:
            return False
        if not (rule.src_port.matches(pkt.src_port) and rule.dst_port.matches(pkt.dst_port)):
            return False
    payload = pkt.payload
    for c in rule.contents:
        if c.nocase:
            if lowered is None:
                lowered = payload.lower()
            if c.pattern.lower() not in lowered:
                return False
        elif c.pattern not in payload:
            return False
    return True


def match_rule(rule: Rule, pkt: DecodedPacket) -> bool:
    """True iff protocol, addresses, ports and every content pattern match."""
    return _matches(rule, pkt, None)


def _build_index(rules):
    by_proto: dict[Proto, list[int]] = {p: [] for p in Proto}
    by_port: dict[Proto, dict[int, list[int]]] = {Proto.TCP: {}, Proto.UDP: {}}
    rest: dict[Proto, list[int]] = {Proto.TCP: [], Proto.UDP: []}
    for i, r in enumerate(rules):
        for p in _PROTO_MATCHES[r.proto]:
            if p in by_port:
                single = r.dst_port.single
                if single is not None:
                    by_port[p].setdefault(single, []).append(i)
                else:
                    rest[p].append(i)
            elif r.src_port.is_any and r.dst_port.is_any:
                by_proto[p].append(i)
    return {"by_proto": by_proto, "by_port": by_port, "rest": rest,
            "by_sid": {r.sid: r for r in rules}}


def scan(ruleset: RuleSet, pkt: DecodedPacket) -> list[int]:
    """Sids of every rule matching ``pkt``, in ruleset order."""
    idx = ruleset._index
    if pkt.proto in idx["by_port"]:
        exact = idx["by_port"][pkt.proto].get(pkt.dst_port, ())
        rest = idx["rest"][pkt.proto]
        candidates = sorted(exact + rest) if exact else rest
    else:
        candidates = idx["by_proto"][pkt.proto]
    rules = ruleset.rules
    lowered = None
    hits = []
    for i in candidates:
        r = rules[i]
        if r.contents and lowered is None and any(c.nocase for c in r.contents):
            lowered = pkt.payload.lower()
        if _matches(r, pkt, lowered):
            hits.append(r.sid)
    return hits
