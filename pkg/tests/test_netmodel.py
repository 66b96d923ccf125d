import struct

import dpkt
import numpy as np
import pytest

from adaptive_ids import netmodel as nm
from adaptive_ids.errors import BadIpHeader, BadMagic, TruncatedFrame, TruncatedRecord
from adaptive_ids.netmodel import Proto, RawFrame, decode_frame, read_pcap, write_pcap

MAC_A = "02:00:00:00:00:01"
MAC_B = "02:00:00:00:00:02"


def _random_frames(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        payload = bytes(rng.integers(0, 256, int(rng.integers(0, 200)), dtype=np.uint8))
        src = f"10.0.{rng.integers(256)}.{rng.integers(1, 255)}"
        dst = f"192.168.{rng.integers(256)}.{rng.integers(1, 255)}"
        kind = i % 4
        if kind == 0:
            data = nm.tcp_frame(MAC_A, MAC_B, src, dst, int(rng.integers(1, 65536)), int(rng.integers(1, 65536)),
                                int(rng.integers(0, 64)), payload)
        elif kind == 1:
            data = nm.udp_frame(MAC_A, MAC_B, src, dst, int(rng.integers(1, 65536)), int(rng.integers(1, 65536)),
                                payload)
        elif kind == 2:
            data = nm.icmp_frame(MAC_A, MAC_B, src, dst, 8, 0, payload, ident=i, seq=i)
        else:
            data = nm.arp_frame(MAC_A, "ff:ff:ff:ff:ff:ff", 2, MAC_A, src, MAC_B, dst)
        out.append(RawFrame(1_700_000_000_000_000 + i * 137, data))
    return out


def test_tcp_frame_decodes():
    data = nm.tcp_frame(MAC_A, MAC_B, "10.0.0.1", "10.0.0.2", 40000, 22, nm.TCP_SYN | nm.TCP_ACK, b"hello")
    p = decode_frame(RawFrame(5, data))
    assert p.proto is Proto.TCP
    assert (p.src_ip, p.dst_ip, p.src_port, p.dst_port) == ("10.0.0.1", "10.0.0.2", 40000, 22)
    assert p.tcp_flags == nm.TCP_SYN | nm.TCP_ACK
    assert p.payload == b"hello"
    assert p.frame_len == len(data)


def test_short_frame_is_padded_and_padding_not_payload():
    data = nm.udp_frame(MAC_A, MAC_B, "1.2.3.4", "5.6.7.8", 1, 2, b"x")
    assert len(data) == 60
    p = decode_frame(RawFrame(0, data))
    assert p.payload == b"x"
    assert p.padding_len == 60 - (14 + 20 + 8 + 1)


def test_arp_fields():
    data = nm.arp_frame(MAC_A, "ff:ff:ff:ff:ff:ff", 2, MAC_A, "10.0.0.1", MAC_B, "10.0.0.2")
    p = decode_frame(RawFrame(0, data))
    assert p.proto is Proto.ARP
    assert p.arp_op == 2
    assert p.arp_sender_mac == nm.mac_bytes(MAC_A)
    assert p.arp_sender_ip == "10.0.0.1"


def test_non_ip_frame():
    data = nm.ethernet(MAC_A, MAC_B, 0x86DD, b"\x60" + b"\0" * 50)
    assert decode_frame(RawFrame(0, data)).proto is Proto.NON_IP


@pytest.mark.parametrize("cut", [5, 14 + 10, 14 + 20 + 4])
def test_truncated(cut):
    data = nm.tcp_frame(MAC_A, MAC_B, "10.0.0.1", "10.0.0.2", 1, 2, 0, b"abc")
    # keep the IP total-length consistent with what is left so only the cut is at fault
    with pytest.raises((TruncatedFrame, BadIpHeader)):
        decode_frame(RawFrame(0, data[:cut]))


def test_bad_ip_version():
    data = bytearray(nm.udp_frame(MAC_A, MAC_B, "1.1.1.1", "2.2.2.2", 1, 2, b"zz"))
    data[14] = 0x65
    with pytest.raises(BadIpHeader):
        decode_frame(RawFrame(0, bytes(data)))


def test_total_length_beyond_frame():
    data = bytearray(nm.udp_frame(MAC_A, MAC_B, "1.1.1.1", "2.2.2.2", 1, 2, b"z" * 40))
    struct.pack_into("!H", data, 16, 2000)
    with pytest.raises(BadIpHeader):
        decode_frame(RawFrame(0, bytes(data)))


def test_fragment_is_not_decoded_further():
    data = bytearray(nm.udp_frame(MAC_A, MAC_B, "1.1.1.1", "2.2.2.2", 1, 2, b"z" * 40))
    struct.pack_into("!H", data, 20, 0x2001)  # MF + offset
    p = decode_frame(RawFrame(0, bytes(data)))
    assert p.proto is Proto.OTHER_IP and p.src_port is None


def test_decoder_agrees_with_dpkt():
    for fr in _random_frames(400, seed=3):
        ours = decode_frame(fr)
        eth = dpkt.ethernet.Ethernet(fr.data)
        if isinstance(eth.data, dpkt.arp.ARP):
            assert ours.proto is Proto.ARP
            assert ours.arp_sender_mac == eth.data.sha
            assert ours.arp_op == eth.data.op
            continue
        ip = eth.data
        assert ours.src_ip == ".".join(str(b) for b in ip.src)
        assert ours.dst_ip == ".".join(str(b) for b in ip.dst)
        l4 = ip.data
        if isinstance(l4, dpkt.tcp.TCP):
            assert ours.proto is Proto.TCP
            assert (ours.src_port, ours.dst_port, ours.tcp_flags) == (l4.sport, l4.dport, l4.flags)
            assert ours.payload == bytes(l4.data)
        elif isinstance(l4, dpkt.udp.UDP):
            assert ours.proto is Proto.UDP
            assert (ours.src_port, ours.dst_port) == (l4.sport, l4.dport)
            assert ours.payload == bytes(l4.data)
        else:
            assert ours.proto is Proto.ICMP
            assert ours.icmp_type == l4.type
            assert ours.payload == bytes(l4.data.data)


def test_ip_checksum_valid_per_dpkt():
    fr = _random_frames(4)[1]
    ip = dpkt.ethernet.Ethernet(fr.data).data
    claimed = ip.sum
    ip.sum = 0
    assert dpkt.in_cksum(bytes(ip.pack_hdr())) == claimed


def test_pcap_round_trip(tmp_path):
    frames = _random_frames(200)
    path = tmp_path / "x.pcap"
    write_pcap(path, frames)
    assert read_pcap(path) == frames


def test_pcap_readable_by_dpkt(tmp_path):
    frames = _random_frames(50)
    path = tmp_path / "x.pcap"
    write_pcap(path, frames)
    with open(path, "rb") as f:
        got = [(round(ts * 1e6), bytes(buf)) for ts, buf in dpkt.pcap.Reader(f)]
    assert [b for _, b in got] == [fr.data for fr in frames]
    assert all(abs(t - fr.timestamp_us) <= 1 for (t, _), fr in zip(got, frames))


def test_reads_dpkt_written_big_endian_nanosecond(tmp_path):
    # hand-built big-endian nanosecond file
    frame = _random_frames(1)[0]
    path = tmp_path / "be.pcap"
    with open(path, "wb") as f:
        f.write(struct.pack(">IHHiIII", nm.PCAP_MAGIC_NS, 2, 4, 0, 0, 65535, 1))
        f.write(struct.pack(">IIII", 12, 345_678_000, len(frame.data), len(frame.data)))
        f.write(frame.data)
    (fr,) = read_pcap(path)
    assert fr.timestamp_us == 12_345_678 and fr.data == frame.data


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.pcap"
    path.write_bytes(b"\x00" * 40)
    with pytest.raises(BadMagic):
        read_pcap(path)


def test_truncated_record(tmp_path):
    path = tmp_path / "t.pcap"
    write_pcap(path, _random_frames(3))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(TruncatedRecord):
        read_pcap(path)
