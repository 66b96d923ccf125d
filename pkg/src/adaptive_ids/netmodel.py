"""Raw frames, Ethernet/IPv4 decoding and classic pcap file I/O.

Only what the detection engine needs is decoded: Ethernet II, ARP (Ethernet/IPv4),
IPv4 and, on top of it, TCP, UDP and ICMP. Everything else is surfaced as
``OtherIp`` / ``NonIp`` with the undecoded bytes left in ``payload``.
"""

from __future__ import annotations

import enum
import ipaddress
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import BadIpHeader, BadMagic, IoFailure, TruncatedFrame, TruncatedRecord

LINKTYPE_ETHERNET = 1
SNAPLEN = 65535

ETH_HDR_LEN = 14
ARP_HDR_LEN = 28
ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_ARP = 0x0806

IPPROTO_ICMP = 1
IPPROTO_TCP = 6
IPPROTO_UDP = 17

TCP_FIN, TCP_SYN, TCP_RST, TCP_PSH, TCP_ACK, TCP_URG = 0x01, 0x02, 0x04, 0x08, 0x10, 0x20

PCAP_MAGIC_US = 0xA1B2C3D4
PCAP_MAGIC_NS = 0xA1B23C4D

_GLOBAL_HDR = struct.Struct("<IHHiIII")
_RECORD_HDR_LE = struct.Struct("<IIII")
_RECORD_HDR_BE = struct.Struct(">IIII")


class Proto(str, enum.Enum):
    TCP = "TCP"
    UDP = "UDP"
    ICMP = "ICMP"
    ARP = "ARP"
    OTHER_IP = "OtherIp"
    NON_IP = "NonIp"


@dataclass(frozen=True, slots=True)
class RawFrame:
    """One captured frame. ``timestamp_us`` is microseconds since the epoch."""

    timestamp_us: int
    data: bytes
    link_type: int = LINKTYPE_ETHERNET

    def __post_init__(self):
        if self.timestamp_us < 0:
            raise ValueError("timestamp_us must be >= 0")


@dataclass(frozen=True, slots=True)
class DecodedPacket:
    timestamp_us: int
    frame_len: int
    src_mac: bytes
    dst_mac: bytes
    ethertype: int
    proto: Proto
    header_len: int
    payload: bytes
    padding_len: int = 0
    src_ip: Optional[str] = None
    dst_ip: Optional[str] = None
    ip_proto: Optional[int] = None
    src_port: Optional[int] = None
    dst_port: Optional[int] = None
    tcp_flags: Optional[int] = None
    icmp_type: Optional[int] = None
    icmp_code: Optional[int] = None
    arp_op: Optional[int] = None
    arp_sender_mac: Optional[bytes] = None
    arp_sender_ip: Optional[str] = None
    arp_target_mac: Optional[bytes] = None
    arp_target_ip: Optional[str] = None

    @property
    def has_ports(self) -> bool:
        return self.proto is Proto.TCP or self.proto is Proto.UDP


def _ip(b: bytes) -> str:
    return "%d.%d.%d.%d" % (b[0], b[1], b[2], b[3])


def decode_frame(frame: RawFrame) -> DecodedPacket:
    """Decode one Ethernet frame.

    Raises TruncatedFrame when the bytes end inside a declared header and
    BadIpHeader for an inconsistent IPv4 (or TCP) header.
    """
    if frame.link_type != LINKTYPE_ETHERNET:
        raise ValueError(f"unsupported link type {frame.link_type}")
    data = frame.data
    n = len(data)
    if n < ETH_HDR_LEN:
        raise TruncatedFrame(f"{n} bytes is shorter than an Ethernet header")
    dst_mac, src_mac = data[0:6], data[6:12]
    (ethertype,) = struct.unpack_from("!H", data, 12)
    common = dict(timestamp_us=frame.timestamp_us, frame_len=n, src_mac=src_mac,
                  dst_mac=dst_mac, ethertype=ethertype)

    if ethertype == ETHERTYPE_ARP:
        if n < ETH_HDR_LEN + ARP_HDR_LEN:
            raise TruncatedFrame("frame ends inside the ARP header")
        htype, ptype, hlen, plen, op = struct.unpack_from("!HHBBH", data, 14)
        if hlen != 6 or plen != 4:
            return DecodedPacket(proto=Proto.NON_IP, header_len=ETH_HDR_LEN,
                                 payload=data[ETH_HDR_LEN:], **common)
        sha, spa = data[22:28], _ip(data[28:32])
        tha, tpa = data[32:38], _ip(data[38:42])
        return DecodedPacket(proto=Proto.ARP, header_len=ETH_HDR_LEN + ARP_HDR_LEN,
                             payload=data[42:], src_ip=spa, dst_ip=tpa, arp_op=op,
                             arp_sender_mac=sha, arp_sender_ip=spa,
                             arp_target_mac=tha, arp_target_ip=tpa, **common)

    if ethertype != ETHERTYPE_IPV4:
        return DecodedPacket(proto=Proto.NON_IP, header_len=ETH_HDR_LEN,
                             payload=data[ETH_HDR_LEN:], **common)

    if n < ETH_HDR_LEN + 20:
        raise TruncatedFrame("frame ends inside the IPv4 header")
    vihl = data[14]
    version, ihl = vihl >> 4, vihl & 0x0F
    if version != 4:
        raise BadIpHeader(f"IP version {version} is not 4")
    if ihl < 5:
        raise BadIpHeader(f"IHL {ihl} < 5")
    ip_hlen = ihl * 4
    if n < ETH_HDR_LEN + ip_hlen:
        raise TruncatedFrame("frame ends inside the IPv4 options")
    total_len, frag_field = struct.unpack_from("!H2xH", data, 16)
    if total_len > n - ETH_HDR_LEN:
        raise BadIpHeader(f"total length {total_len} exceeds the {n - ETH_HDR_LEN} bytes available")
    if total_len < ip_hlen:
        raise BadIpHeader(f"total length {total_len} is smaller than the header ({ip_hlen})")
    ip_proto = data[23]
    src_ip, dst_ip = _ip(data[26:30]), _ip(data[30:34])
    l4 = ETH_HDR_LEN + ip_hlen
    end = ETH_HDR_LEN + total_len
    padding = n - end
    ip_common = dict(src_ip=src_ip, dst_ip=dst_ip, ip_proto=ip_proto, padding_len=padding, **common)
    avail = end - l4

    # fragments are never reassembled
    if frag_field & 0x3FFF:
        return DecodedPacket(proto=Proto.OTHER_IP, header_len=l4, payload=data[l4:end], **ip_common)

    if ip_proto == IPPROTO_TCP:
        if avail < 20:
            raise TruncatedFrame("datagram ends inside the TCP header")
        sport, dport, off_flags = struct.unpack_from("!HH8xH", data, l4)
        thlen = (off_flags >> 12) * 4
        if thlen < 20:
            raise BadIpHeader(f"TCP data offset {thlen // 4} < 5")
        if avail < thlen:
            raise TruncatedFrame("datagram ends inside the TCP options")
        return DecodedPacket(proto=Proto.TCP, header_len=l4 + thlen, payload=data[l4 + thlen:end],
                             src_port=sport, dst_port=dport, tcp_flags=off_flags & 0xFF, **ip_common)
    if ip_proto == IPPROTO_UDP:
        if avail < 8:
            raise TruncatedFrame("datagram ends inside the UDP header")
        sport, dport = struct.unpack_from("!HH", data, l4)
        return DecodedPacket(proto=Proto.UDP, header_len=l4 + 8, payload=data[l4 + 8:end],
                             src_port=sport, dst_port=dport, **ip_common)
    if ip_proto == IPPROTO_ICMP:
        if avail < 8:
            raise TruncatedFrame("datagram ends inside the ICMP header")
        return DecodedPacket(proto=Proto.ICMP, header_len=l4 + 8, payload=data[l4 + 8:end],
                             icmp_type=data[l4], icmp_code=data[l4 + 1], **ip_common)
    return DecodedPacket(proto=Proto.OTHER_IP, header_len=l4, payload=data[l4:end], **ip_common)


# -- pcap --------------------------------------------------------------------

def iter_pcap(path) -> Iterator[RawFrame]:
    """Yield the frames of a classic pcap file in file order."""
    try:
        f = open(path, "rb")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    with f:
        head = f.read(24)
        if len(head) < 4:
            raise BadMagic("file too short for a pcap magic number")
        (magic_le,) = struct.unpack("<I", head[:4])
        (magic_be,) = struct.unpack(">I", head[:4])
        if magic_le in (PCAP_MAGIC_US, PCAP_MAGIC_NS):
            rec, nanos = _RECORD_HDR_LE, magic_le == PCAP_MAGIC_NS
            endian = "<"
        elif magic_be in (PCAP_MAGIC_US, PCAP_MAGIC_NS):
            rec, nanos = _RECORD_HDR_BE, magic_be == PCAP_MAGIC_NS
            endian = ">"
        else:
            raise BadMagic(f"unknown pcap magic 0x{magic_le:08x}")
        if len(head) < 24:
            raise TruncatedRecord("truncated pcap global header")
        (linktype,) = struct.unpack(endian + "I", head[20:24])
        index = 0
        while True:
            rh = f.read(16)
            if not rh:
                return
            if len(rh) < 16:
                raise TruncatedRecord(f"record {index}: truncated record header")
            ts_sec, ts_frac, incl_len, _orig = rec.unpack(rh)
            body = f.read(incl_len)
            if len(body) < incl_len:
                raise TruncatedRecord(f"record {index}: expected {incl_len} bytes, got {len(body)}")
            ts_us = ts_sec * 1_000_000 + (ts_frac // 1000 if nanos else ts_frac)
            yield RawFrame(ts_us, body, linktype)
            index += 1


def read_pcap(path) -> list[RawFrame]:
    return list(iter_pcap(path))


def write_pcap(path, frames: Iterable[RawFrame]) -> None:
    """Write little-endian microsecond pcap (linktype 1, snaplen 65535)."""
    try:
        with open(path, "wb") as f:
            f.write(_GLOBAL_HDR.pack(PCAP_MAGIC_US, 2, 4, 0, 0, SNAPLEN, LINKTYPE_ETHERNET))
            for fr in frames:
                if fr.link_type != LINKTYPE_ETHERNET:
                    raise ValueError("write_pcap only writes Ethernet frames")
                sec, usec = divmod(fr.timestamp_us, 1_000_000)
                f.write(_RECORD_HDR_LE.pack(sec, usec, len(fr.data), len(fr.data)))
                f.write(fr.data)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# -- frame construction (used by the traffic generator and tests) -----------

def mac_bytes(mac) -> bytes:
    if isinstance(mac, bytes):
        return mac
    return bytes(int(p, 16) for p in mac.split(":"))


def _ip_bytes(ip) -> bytes:
    return ipaddress.IPv4Address(ip).packed


def _checksum(b: bytes) -> int:
    if len(b) % 2:
        b += b"\0"
    s = sum(struct.unpack("!%dH" % (len(b) // 2), b))
    while s >> 16:
        s = (s & 0xFFFF) + (s >> 16)
    return ~s & 0xFFFF


def ethernet(src_mac, dst_mac, ethertype: int, body: bytes, pad: bool = True) -> bytes:
    frame = mac_bytes(dst_mac) + mac_bytes(src_mac) + struct.pack("!H", ethertype) + body
    if pad and len(frame) < 60:
        frame += b"\0" * (60 - len(frame))
    return frame


def ipv4(src_ip, dst_ip, proto: int, body: bytes, ttl: int = 64, ident: int = 0) -> bytes:
    hdr = struct.pack("!BBHHHBBH4s4s", 0x45, 0, 20 + len(body), ident & 0xFFFF, 0x4000,
                      ttl, proto, 0, _ip_bytes(src_ip), _ip_bytes(dst_ip))
    cs = _checksum(hdr)
    return hdr[:10] + struct.pack("!H", cs) + hdr[12:] + body


def tcp(sport: int, dport: int, flags: int, payload: bytes = b"", seq: int = 0, ack: int = 0,
        window: int = 64240) -> bytes:
    # checksum left zero: nothing in the engine validates L4 checksums
    return struct.pack("!HHIIBBHHH", sport, dport, seq & 0xFFFFFFFF, ack & 0xFFFFFFFF,
                       5 << 4, flags, window, 0, 0) + payload


def udp(sport: int, dport: int, payload: bytes = b"") -> bytes:
    return struct.pack("!HHHH", sport, dport, 8 + len(payload), 0) + payload


def icmp(itype: int, code: int, payload: bytes = b"", ident: int = 0, seq: int = 0) -> bytes:
    hdr = struct.pack("!BBHHH", itype, code, 0, ident, seq)
    cs = _checksum(hdr + payload)
    return hdr[:2] + struct.pack("!H", cs) + hdr[4:] + payload


def arp(op: int, sender_mac, sender_ip, target_mac, target_ip) -> bytes:
    return struct.pack("!HHBBH6s4s6s4s", 1, ETHERTYPE_IPV4, 6, 4, op,
                       mac_bytes(sender_mac), _ip_bytes(sender_ip),
                       mac_bytes(target_mac), _ip_bytes(target_ip))


def tcp_frame(src_mac, dst_mac, src_ip, dst_ip, sport, dport, flags, payload=b"", **kw) -> bytes:
    return ethernet(src_mac, dst_mac, ETHERTYPE_IPV4,
                    ipv4(src_ip, dst_ip, IPPROTO_TCP, tcp(sport, dport, flags, payload, **kw)))


def udp_frame(src_mac, dst_mac, src_ip, dst_ip, sport, dport, payload=b"") -> bytes:
    return ethernet(src_mac, dst_mac, ETHERTYPE_IPV4,
                    ipv4(src_ip, dst_ip, IPPROTO_UDP, udp(sport, dport, payload)))


def icmp_frame(src_mac, dst_mac, src_ip, dst_ip, itype=8, code=0, payload=b"", ident=0, seq=0) -> bytes:
    return ethernet(src_mac, dst_mac, ETHERTYPE_IPV4,
                    ipv4(src_ip, dst_ip, IPPROTO_ICMP, icmp(itype, code, payload, ident, seq)))


def arp_frame(src_mac, dst_mac, op, sender_mac, sender_ip, target_mac, target_ip) -> bytes:
    return ethernet(src_mac, dst_mac, ETHERTYPE_ARP,
                    arp(op, sender_mac, sender_ip, target_mac, target_ip))
