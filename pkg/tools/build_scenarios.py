"""Write the bundled scenario files (evaluation seed 42, training seed 7).

Seven 20-second segments, one per attack category. Each segment carries
bulk legitimate traffic (1,470-byte payloads), a lighter interactive stream
with small payloads, and the attack itself starting two seconds in.

    python tools/build_scenarios.py
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "adaptive_ids" / "data"
SEGMENT = 20.0
BUSY_RATE = 300.0
BUSY_PAYLOAD = 160
BUSY_SESSION = 6.0
BUSY_COLLISION = 0.08

# category, bulk legit kind, port, interactive payload size, attack kind, attack overrides
SEGMENTS = [
    ("SSH", "legit_tcp", 22, 48, "atk_ssh", {"rate": 600, "count": 9600, "payload_size": 200, "hosts": 8}),
    ("DoS", "legit_udp", 5001, 64, "atk_dos", {"rate": 5000, "count": 45000, "payload_size": 256}),
    ("FTP", "legit_tcp", 21, 40, "atk_ftp", {"rate": 600, "count": 9600, "payload_size": 200, "hosts": 8}),
    ("HTTP", "legit_tcp", 80, 240, "atk_http", {"rate": 600, "count": 9600, "payload_size": 900, "hosts": 8}),
    ("ICMP", "legit_icmp", None, 56, "atk_icmp", {"rate": 3000, "count": 36000}),
    ("ARP", "legit_udp", 5001, 64, "atk_arp", {"rate": 50, "count": 800}),
    ("SCAN", "legit_tcp", 443, 120, "atk_scan", {"rate": 500, "count": 8000}),
]


def streams():
    out = []
    for i, (cat, kind, port, small, atk, over) in enumerate(SEGMENTS):
        t0 = i * SEGMENT
        bulk_rate = 1000.0 if kind == "legit_icmp" else 500.0
        ep = {"src_net": f"10.{i + 1}.0.0/24", "hosts": 8, "dst": f"192.168.{i + 1}.10"}
        ep_small = {"src_net": f"10.{i + 1}.1.0/24", "hosts": 12, "dst": f"192.168.{i + 1}.10"}
        if port is not None:
            ep["dport"] = port
            ep_small["dport"] = port
        bulk = {"kind": kind, "rate": bulk_rate, "count": int(bulk_rate * SEGMENT), "start": t0,
                "endpoints": ep, "category": cat, "collision_prob": 0.004, "host_skew": 1.0}
        small_stream = {"kind": kind, "rate": 120.0, "count": int(120 * SEGMENT), "start": t0 + 0.25,
                        "endpoints": ep_small, "category": cat, "payload_size": small,
                        "collision_prob": 0.02, "host_skew": 1.0}
        if kind == "legit_tcp":
            bulk["session_len"] = 40.0
            small_stream["session_len"] = 8.0
        out += [bulk, small_stream]
        if kind == "legit_tcp":
            # a few busy clients opening many short connections, close to the attack session shape
            busy_ep = {"src_net": f"10.{i + 1}.2.0/24", "hosts": 4, "dst": f"192.168.{i + 1}.10", "dport": port}
            out.append({"kind": kind, "rate": BUSY_RATE, "count": int(BUSY_RATE * (SEGMENT - 1)),
                        "start": t0 + 0.5, "endpoints": busy_ep, "category": cat, "payload_size": BUSY_PAYLOAD,
                        "session_len": BUSY_SESSION, "reply_ratio": 0.35, "collision_prob": BUSY_COLLISION})
        over = dict(over)
        atk_ep = {"src_net": f"172.16.{i + 1}.0/24", "dst": f"192.168.{i + 1}.10"}
        if "hosts" in over:
            atk_ep["hosts"] = over.pop("hosts")
        out.append({"kind": atk, "start": t0 + 2.0, "endpoints": atk_ep, **over})
    return out


def main():
    for name, seed in (("mixed_seed42", 42), ("train_seed7", 7)):
        spec = {"name": name, "seed": seed, "collision_fraction": 0.05, "streams": streams()}
        (OUT / f"scenario_{name}.json").write_text(json.dumps(spec, indent=1) + "\n", encoding="utf-8")
        print("wrote", OUT / f"scenario_{name}.json")


if __name__ == "__main__":
    main()
