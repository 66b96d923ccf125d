import numpy as np
import pytest

from adaptive_ids import netmodel as nm
from adaptive_ids.dataset import LIVE_FEATURES, group_windows, extract_flow_features
from adaptive_ids.errors import InvalidSpec
from adaptive_ids.rules import scan
from adaptive_ids.trafficgen import (ATTACK_KINDS, BASE_TIME_US, GroundTruth, ScenarioSpec, StreamSpec,
                                     bundled_scenario, gen_attack, gen_legit, mix, write_outputs)


def decode_all(frames):
    return [nm.decode_frame(f) for f in frames]


def test_legit_udp_profile():
    frames, truth = gen_legit("legit_udp", 500, 1000, 42)
    assert len(frames) == 1000
    pkts = decode_all(frames)
    assert all(len(p.payload) == 1470 for p in pkts)
    span = (frames[-1].timestamp_us - frames[0].timestamp_us) / 1e6
    assert span == pytest.approx(2.0, abs=0.01)
    assert all(r.label == "benign" for r in truth)


def test_jitter_bound():
    frames, _ = gen_legit("legit_tcp", 400, 500, 1)
    ts = np.array([f.timestamp_us for f in frames]) - BASE_TIME_US
    ideal = np.arange(500) * 2500
    assert np.max(np.abs(ts - ideal)) <= 0.01 * 2500 + 1


def test_legit_payload_is_printable_and_scrubbed(ruleset):
    frames, _ = gen_legit("legit_udp", 500, 300, 4)
    for p in decode_all(frames):
        assert all(32 <= b < 127 for b in p.payload)
        assert scan(ruleset, p) == []


def test_same_seed_same_bytes():
    a, _ = gen_legit("legit_udp", 500, 200, 9)
    b, _ = gen_legit("legit_udp", 500, 200, 9)
    c, _ = gen_legit("legit_udp", 500, 200, 10)
    assert a == b and a != c


@pytest.mark.parametrize("bad", [dict(rate=0), dict(rate=-1), dict(count=0)])
def test_invalid_legit(bad):
    kw = {"rate": 500, "count": 10, **bad}
    with pytest.raises(InvalidSpec):
        gen_legit("legit_udp", kw["rate"], kw["count"], 0)


def test_wrong_kinds():
    with pytest.raises(InvalidSpec):
        gen_attack("legit_udp")
    with pytest.raises(InvalidSpec):
        gen_legit("atk_scan", 10, 10, 0)
    with pytest.raises(InvalidSpec):
        StreamSpec("atk_teleport")


def test_scan_touches_many_ports():
    frames, truth = gen_attack("atk_scan", seed=3)
    windows = group_windows(decode_all(frames))
    col = LIVE_FEATURES.index("unique_dst_ports")
    assert max(extract_flow_features(w)[col] for w in windows) >= 100
    assert {r.category for r in truth} == {"SCAN"}


def test_arp_conflicting_macs():
    frames, _ = gen_attack("atk_arp", seed=0)
    pkts = decode_all(frames)
    assert all(p.proto is nm.Proto.ARP for p in pkts)
    by_ip = {}
    for p in pkts:
        by_ip.setdefault(p.arp_sender_ip, set()).add(p.arp_sender_mac)
    assert max(len(v) for v in by_ip.values()) >= 2


def test_dos_rate_and_sources():
    frames, _ = gen_attack("atk_dos", seed=0, count=5000)
    pkts = decode_all(frames)
    span = (frames[-1].timestamp_us - frames[0].timestamp_us) / 1e6
    assert len(frames) / span >= 10 * 500
    assert len({p.src_ip for p in pkts}) >= 10 and len({p.dst_ip for p in pkts}) == 1


def test_icmp_flood_is_echo_requests():
    frames, _ = gen_attack("atk_icmp", seed=0, count=500)
    assert {(p.icmp_type, p.icmp_code) for p in decode_all(frames)} == {(8, 0)}


@pytest.mark.parametrize("kind", [k for k in ATTACK_KINDS if k not in ("atk_scan", "atk_arp")])
def test_attacks_trigger_their_category(kind, ruleset):
    frames, truth = gen_attack(kind, seed=1, count=300)
    cat = next(iter(truth)).category
    fired = {ruleset.get(sid).category.value for p in decode_all(frames) for sid in scan(ruleset, p)}
    assert cat in fired
    assert all(r.label == "malicious" for r in truth)


@pytest.mark.parametrize("kind,port", [("atk_ssh", 22), ("atk_ftp", 21), ("atk_http", 80)])
def test_session_attacks_use_service_port(kind, port):
    frames, _ = gen_attack(kind, seed=2, count=120)
    pkts = decode_all(frames)
    assert all(port in (p.src_port, p.dst_port) for p in pkts)
    # each client host runs its own six-packet sessions back to back
    per_client = {}
    for p in pkts:
        client = p.src_ip if p.dst_port == port else p.dst_ip
        per_client.setdefault(client, []).append(p)
    syns = [p for p in pkts if p.tcp_flags == nm.TCP_SYN]
    assert len(syns) == sum(-(-len(v) // 6) for v in per_client.values())
    assert all(v[0].tcp_flags == nm.TCP_SYN for v in per_client.values())


def tiny_scenario(seed=5, **extra):
    return ScenarioSpec.from_json({"seed": seed, "streams": [
        {"kind": "legit_udp", "rate": 1000, "count": 300},
        {"kind": "legit_udp", "rate": 1000, "count": 300, "endpoints": {"src_net": "10.9.0.0/24"}},
        {"kind": "atk_http", "rate": 200, "count": 60, "start": 0.1},
    ], **extra})


def test_mix_sorted_and_complete():
    frames, truth = mix(tiny_scenario())
    ts = [f.timestamp_us for f in frames]
    assert ts == sorted(ts) and len(frames) == 660
    labels = {r.label for r in truth}
    assert labels == {"benign", "malicious"}
    keys = [(r.window_start_us, r.flow_key) for r in truth]
    assert len(keys) == len(set(keys))


def test_mix_tie_break_keeps_declaration_order(monkeypatch):
    from adaptive_ids import trafficgen
    exact = trafficgen._timestamps
    monkeypatch.setattr(trafficgen, "_timestamps", lambda rng, s, r, c, jitter=0.0: exact(rng, s, r, c, 0.0))
    frames, _ = mix(ScenarioSpec.from_json({"seed": 1, "streams": [
        {"kind": "legit_udp", "rate": 1000, "count": 50, "endpoints": {"src_net": "10.7.0.0/24"}},
        {"kind": "legit_udp", "rate": 1000, "count": 50, "endpoints": {"src_net": "10.3.0.0/24"}},
    ]}))
    nets = [nm.decode_frame(f).src_ip.split(".")[1] for f in frames]
    assert nets == ["7", "3"] * 50


def test_empty_scenario():
    with pytest.raises(InvalidSpec):
        ScenarioSpec.from_json({"streams": []})
    with pytest.raises(InvalidSpec):
        ScenarioSpec.from_json({"streams": [{"kind": "legit_udp", "speed": 3}]})


def test_outputs_byte_identical(tmp_path):
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        frames, truth = mix(tiny_scenario())
        write_outputs(frames, truth, tmp_path / d / "x.pcap", tmp_path / d / "t.jsonl")
    for name in ("x.pcap", "t.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    back = GroundTruth.read_jsonl(tmp_path / "a" / "t.jsonl")
    assert back.records == mix(tiny_scenario())[1].records


def test_bundled_scenarios_cover_all_categories():
    for name in ("mixed_seed42", "train_seed7"):
        spec = bundled_scenario(name)
        kinds = {s.kind for s in spec.streams}
        assert set(ATTACK_KINDS) <= kinds
    assert bundled_scenario("mixed_seed42").seed == 42
