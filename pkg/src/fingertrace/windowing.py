"""Fixed-window discretization and per-cell RSSI aggregation.

Packets are bucketed into windows of length ``window_len`` seconds starting
at ``origin``; inside each (device, window) cell the RSSIs seen by each
sniffer are reduced to a single statistic (mean by default, median as an
opt-in for robustness studies).  Windows with no packets simply have no
cell: absence encodes "no measurement", never a sentinel RSSI.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from fingertrace.ingest import PacketRecord


@dataclass(frozen=True)
class WindowSpec:
    window_len: float = 20.0
    origin: float = 0.0

    def __post_init__(self):
        if self.window_len <= 0:
            raise ValueError("window_len must be > 0")

    def index(self, ts: float) -> int:
        """Window index of a timestamp; ts < origin is out of range."""
        return math.floor((ts - self.origin) / self.window_len)

    def start(self, window: int) -> float:
        return self.origin + window * self.window_len


@dataclass(frozen=True, slots=True)
class CellStats:
    mean_rssi: float
    packet_count: int


@dataclass
class WindowedRssi:
    """Sparse map of (device, window) -> sniffer -> aggregated RSSI."""

    spec: WindowSpec
    cells: dict[tuple[str, int], dict[str, CellStats]] = field(default_factory=dict)
    dropped_early: int = 0

    def devices(self) -> list[str]:
        return sorted({dev for dev, _ in self.cells})

    def sniffers(self) -> list[str]:
        seen = set()
        for inner in self.cells.values():
            seen.update(inner)
        return sorted(seen)

    def packet_total(self) -> int:
        return sum(st.packet_count for inner in self.cells.values() for st in inner.values())


def default_origin(records: Sequence[PacketRecord], window_len: float) -> float:
    """Floor of the earliest timestamp to a multiple of window_len."""
    earliest = min(r.ts for r in records)
    return math.floor(earliest / window_len) * window_len


def aggregate(
    records: Sequence[PacketRecord],
    spec: WindowSpec | None = None,
    window_len: float = 20.0,
    statistic: str = "mean",
) -> WindowedRssi:
    """Aggregate a record stream into per-cell RSSI statistics.

    With no explicit spec the origin defaults to the earliest timestamp
    floored to a multiple of ``window_len``.  Records earlier than the
    origin are dropped and counted.  Order independent.
    """
    if statistic not in ("mean", "median"):
        raise ValueError(f"unknown statistic: {statistic!r}")
    if spec is None:
        if not records:
            return WindowedRssi(WindowSpec(window_len, 0.0))
        spec = WindowSpec(window_len, default_origin(records, window_len))

    buckets: dict[tuple[str, int], dict[str, list[int]]] = {}
    dropped = 0
    for rec in records:
        if rec.ts < spec.origin:
            dropped += 1
            continue
        w = spec.index(rec.ts)
        buckets.setdefault((rec.device, w), {}).setdefault(rec.sniffer, []).append(rec.rssi)

    reduce = statistics.fmean if statistic == "mean" else statistics.median
    out = WindowedRssi(spec, dropped_early=dropped)
    for key, per_sniffer in buckets.items():
        out.cells[key] = {
            sniffer: CellStats(float(reduce(values)), len(values))
            for sniffer, values in per_sniffer.items()
        }
    return out


def aggregate_table(df, spec: WindowSpec | None = None, window_len: float = 20.0) -> WindowedRssi:
    """Vectorized mean aggregation of an ingest packet table (polars)."""
    import polars as pl

    if df.height == 0:
        return WindowedRssi(spec if spec is not None else WindowSpec(window_len, 0.0))
    if spec is None:
        earliest = float(df["ts"].min())
        spec = WindowSpec(window_len, math.floor(earliest / window_len) * window_len)

    in_range = df.filter(pl.col("ts") >= spec.origin)
    dropped = df.height - in_range.height
    grouped = (
        in_range.with_columns(
            ((pl.col("ts") - spec.origin) / spec.window_len).floor().cast(pl.Int64).alias("window")
        )
        .group_by("device", "window", "sniffer")
        .agg(pl.col("rssi").mean().alias("mean_rssi"), pl.len().alias("packet_count"))
    )
    out = WindowedRssi(spec, dropped_early=dropped)
    for device, window, sniffer, mean_rssi, count in grouped.iter_rows():
        out.cells.setdefault((device, int(window)), {})[sniffer] = CellStats(float(mean_rssi), int(count))
    return out


def signal_matrix(windowed: WindowedRssi, device: str) -> tuple[list[str], list[list]]:
    """Dense per-window table of mean RSSI per sniffer for one device.

    Returns (header, rows) ready for CSV export.  Rows run from the
    device's first to last observed window; missing measurements are empty
    strings.  For 2-sniffer deployments a difference column (first sniffer
    minus second, by ascending id) is appended, empty when either side is
    missing.
    """
    dev_windows = sorted(w for d, w in windowed.cells if d == device)
    if not dev_windows:
        raise KeyError(f"unknown device: {device!r}")
    sniffers = windowed.sniffers()
    two = len(sniffers) == 2
    header = ["window_start_s"] + sniffers
    if two:
        header.append(f"diff_{sniffers[0]}_minus_{sniffers[1]}")
    rows = []
    for w in range(dev_windows[0], dev_windows[-1] + 1):
        inner = windowed.cells.get((device, w), {})
        row: list = [windowed.spec.start(w)]
        for s in sniffers:
            st = inner.get(s)
            row.append(st.mean_rssi if st is not None else "")
        if two:
            a, b = inner.get(sniffers[0]), inner.get(sniffers[1])
            row.append(a.mean_rssi - b.mean_rssi if a is not None and b is not None else "")
        rows.append(row)
    return header, rows


def write_signal_matrix(windowed: WindowedRssi, device: str, stream: IO) -> None:
    header, rows = signal_matrix(windowed, device)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_cells(windowed: WindowedRssi, stream: IO) -> None:
    """Persist aggregated cells as CSV (device, window, sniffer, mean, count)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["device", "window", "sniffer", "mean_rssi", "packet_count"])
    for (device, window), inner in sorted(windowed.cells.items()):
        for sniffer in sorted(inner):
            st = inner[sniffer]
            writer.writerow([device, window, sniffer, repr(st.mean_rssi), st.packet_count])


def read_cells(rows: Iterable[Sequence[str]], spec: WindowSpec) -> WindowedRssi:
    """Inverse of :func:`write_cells` (rows exclude the header)."""
    out = WindowedRssi(spec)
    for device, window, sniffer, mean_rssi, count in rows:
        out.cells.setdefault((device, int(window)), {})[sniffer] = CellStats(
            float(mean_rssi), int(count)
        )
    return out
