"""Seeded generator of Wireshark-style packet lists for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .ingest import CaptureBatch, PacketRecord

# protocol -> (mean length, sd, destinations it tends to use)
DEFAULT_PROFILES = {
    "TCP": (60.0, 6.0, ("172.21.206.143", "23.213.142.10", "117.18.232.200")),
    "DNS": (420.0, 25.0, ("10.237.15.1", "10.237.15.2")),
    "QUIC": (1250.0, 40.0, ("74.125.68.93", "173.194.22.40", "172.21.206.143")),
}


def synthetic_batch(n=3000, seed=1, profiles=None, label="synthetic", weights=None):
    """``n`` packets whose Length depends on the protocol.

    Destinations are drawn per protocol so both classification tasks have
    signal. Lengths are clipped to [42, 1514] like Ethernet frames.
    """
    profiles = profiles or DEFAULT_PROFILES
    rng = np.random.default_rng(seed)
    names = list(profiles)
    p = None if weights is None else np.asarray(weights, float) / np.sum(weights)
    protos = rng.choice(len(names), size=n, p=p)
    t = np.cumsum(rng.exponential(0.01, size=n))
    records = []
    for k in range(n):
        name = names[protos[k]]
        mean, sd, dests = profiles[name]
        length = int(np.clip(round(rng.normal(mean, sd)), 42, 1514))
        dst = dests[rng.integers(len(dests))]
        src = f"172.21.{rng.integers(1, 255)}.{rng.integers(1, 255)}"
        records.append(
            PacketRecord(k + 1, round(float(t[k]), 6), src, dst, name, length, f"{name} payload, seq={k}")
        )
    return CaptureBatch(label, records, [(f"{label}.csv", n)])
