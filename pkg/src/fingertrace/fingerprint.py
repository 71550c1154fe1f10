"""Wireless fingerprints: the per-window sniffer list in descending RSSI order.

A fingerprint for (device, window) lists every sniffer that heard the
device in that window, strongest mean RSSI first.  RSSI ties are broken by
ascending sniffer id so fixtures stay deterministic.  Only rank order is
ever used downstream; RSSI magnitudes are discarded here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

from fingertrace.windowing import WindowedRssi


@dataclass(frozen=True, slots=True)
class Fingerprint:
    window: int
    sniffers: tuple[str, ...]

    def __post_init__(self):
        if not self.sniffers:
            raise ValueError("fingerprint must list at least one sniffer")
        if len(set(self.sniffers)) != len(self.sniffers):
            raise ValueError("duplicate sniffer in fingerprint")


@dataclass
class FingerprintSeries:
    device: str
    entries: dict[int, Fingerprint] = field(default_factory=dict)

    def windows(self) -> list[int]:
        return sorted(self.entries)

    def sniffers(self) -> set[str]:
        seen: set[str] = set()
        for fp in self.entries.values():
            seen.update(fp.sniffers)
        return seen


def build_fingerprints(windowed: WindowedRssi) -> dict[str, FingerprintSeries]:
    """One fingerprint per non-empty cell, per device, sorted by window."""
    out: dict[str, FingerprintSeries] = {}
    for (device, window), inner in sorted(windowed.cells.items()):
        ordered = sorted(inner.items(), key=lambda kv: (-kv[1].mean_rssi, kv[0]))
        series = out.setdefault(device, FingerprintSeries(device))
        series.entries[window] = Fingerprint(window, tuple(s for s, _ in ordered))
    return out


def prefix(fp: Fingerprint, k: int) -> tuple[str, ...]:
    """First min(k, length) sniffers of a fingerprint."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return fp.sniffers[:k]


def write_fingerprints(series_map: dict[str, FingerprintSeries], stream: IO) -> None:
    """JSONL export: {device, window, sniffers: [...]} in sorted order."""
    for device in sorted(series_map):
        series = series_map[device]
        for window in series.windows():
            fp = series.entries[window]
            stream.write(json.dumps({"device": device, "window": window, "sniffers": list(fp.sniffers)}))
            stream.write("\n")


def read_fingerprints(stream) -> dict[str, FingerprintSeries]:
    out: dict[str, FingerprintSeries] = {}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        series = out.setdefault(obj["device"], FingerprintSeries(obj["device"]))
        series.entries[int(obj["window"])] = Fingerprint(int(obj["window"]), tuple(obj["sniffers"]))
    return out
