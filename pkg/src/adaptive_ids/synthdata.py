"""Seeded stand-in for NSL-KDD records.

Rows follow the 41-feature + label (+ difficulty) CSV layout so they go
through the same loader as the real files. Classes are drawn from a few
connection archetypes whose feature ranges overlap, so classifiers do not
reach perfect accuracy and parameter choices matter.
"""

from __future__ import annotations

import csv
from typing import Optional

import numpy as np

from .dataset import NSL_KDD_FEATURES

# (label, protocol, services, flags, weight)
_NORMAL = [("normal", "tcp", ["http", "smtp", "ftp_data", "domain_u"], ["SF"], 0.8),
           ("normal", "udp", ["domain_u", "ntp_u", "private"], ["SF"], 0.2)]
_ATTACK = [("neptune", "tcp", ["private", "http", "telnet"], ["S0", "REJ"], 0.45),
           ("smurf", "icmp", ["ecr_i"], ["SF"], 0.15),
           ("portsweep", "tcp", ["private", "other"], ["RSTR", "REJ", "SH"], 0.15),
           ("guess_passwd", "tcp", ["telnet", "ftp", "pop_3"], ["SF", "RSTO"], 0.15),
           ("back", "tcp", ["http"], ["SF"], 0.10)]


def _row(rng: np.random.Generator, label: str, proto: str, services, flags, noise: float) -> list:
    attack = label != "normal"
    v = dict.fromkeys(NSL_KDD_FEATURES, 0.0)
    v["protocol_type"] = proto
    v["service"] = services[rng.integers(len(services))]
    v["flag"] = flags[rng.integers(len(flags))]

    def mix(benign_draw, attack_draw):
        # with probability `noise` an attack row borrows the benign profile and vice versa
        use_attack = attack != (rng.random() < noise)
        return attack_draw() if use_attack else benign_draw()

    v["duration"] = mix(lambda: rng.exponential(30), lambda: rng.exponential(3))
    v["src_bytes"] = mix(lambda: rng.lognormal(6.0, 1.0), lambda: rng.lognormal(3.5, 1.5))
    v["dst_bytes"] = mix(lambda: rng.lognormal(7.0, 1.5), lambda: rng.lognormal(2.0, 2.0))
    v["logged_in"] = float(mix(lambda: rng.random() < 0.8, lambda: rng.random() < 0.2))
    v["count"] = mix(lambda: rng.integers(1, 40), lambda: rng.integers(60, 511))
    v["srv_count"] = mix(lambda: rng.integers(1, 40), lambda: rng.integers(1, 200))
    v["serror_rate"] = mix(lambda: rng.beta(1, 20), lambda: rng.beta(4, 2))
    v["srv_serror_rate"] = v["serror_rate"] * rng.uniform(0.8, 1.0)
    v["rerror_rate"] = mix(lambda: rng.beta(1, 20), lambda: rng.beta(2, 4))
    v["srv_rerror_rate"] = v["rerror_rate"] * rng.uniform(0.8, 1.0)
    v["same_srv_rate"] = mix(lambda: rng.beta(8, 1), lambda: rng.beta(1, 4))
    v["diff_srv_rate"] = mix(lambda: rng.beta(1, 12), lambda: rng.beta(2, 5))
    v["dst_host_count"] = mix(lambda: rng.integers(1, 255), lambda: rng.integers(150, 256))
    v["dst_host_srv_count"] = mix(lambda: rng.integers(100, 256), lambda: rng.integers(1, 60))
    v["dst_host_same_srv_rate"] = mix(lambda: rng.beta(8, 2), lambda: rng.beta(1, 6))
    v["dst_host_diff_srv_rate"] = mix(lambda: rng.beta(1, 15), lambda: rng.beta(2, 6))
    v["dst_host_serror_rate"] = v["serror_rate"] * rng.uniform(0.7, 1.0)
    v["dst_host_srv_serror_rate"] = v["serror_rate"] * rng.uniform(0.7, 1.0)
    v["dst_host_rerror_rate"] = v["rerror_rate"] * rng.uniform(0.7, 1.0)
    v["dst_host_srv_rerror_rate"] = v["rerror_rate"] * rng.uniform(0.7, 1.0)
    if label == "guess_passwd":
        v["num_failed_logins"] = float(rng.integers(1, 5))
        v["hot"] = float(rng.integers(0, 3))
    if label == "back":
        v["hot"] = float(rng.integers(1, 30))
    if label == "normal" and rng.random() < 0.05:
        v["num_file_creations"] = float(rng.integers(1, 4))

    out = []
    for name in NSL_KDD_FEATURES:
        x = v[name]
        if isinstance(x, str):
            out.append(x)
        elif name.endswith("_rate"):
            out.append(f"{float(x):.2f}")
        elif name in ("src_bytes", "dst_bytes", "duration"):
            out.append(str(int(x)))
        else:
            out.append(f"{float(x):g}")
    return out + [label, str(int(rng.integers(5, 22)))]


def synthetic_nsl_kdd_rows(n: int = 500, seed: int = 0, attack_share: float = 0.47,
                           noise: float = 0.12) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        pool = _ATTACK if rng.random() < attack_share else _NORMAL
        weights = np.array([p[-1] for p in pool])
        label, proto, services, flags, _ = pool[rng.choice(len(pool), p=weights / weights.sum())]
        rows.append(_row(rng, label, proto, services, flags, noise))
    return rows


def write_synthetic_nsl_kdd(path, n: int = 500, seed: int = 0, noise: Optional[float] = None) -> None:
    kwargs = {} if noise is None else {"noise": noise}
    with open(path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f).writerows(synthetic_nsl_kdd_rows(n, seed, **kwargs))
