"""Parse, validate and normalize raw sniffer packet logs.

Canonical on-disk format is JSON lines with fields ``ts`` (seconds, number),
``sniffer`` (string), ``device`` (string), ``rssi`` (integer dBm).  CSV with
a header row and the same columns in that order is accepted as well.
Malformed lines never abort a parse; they land in a rejects report with the
line number and a reason (lossy input is the norm for sniffer logs).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

JSONL_FIELDS = ("ts", "sniffer", "device", "rssi")

REASON_BAD_JSON = "invalid json"
REASON_BAD_CSV = "invalid csv row"
REASON_MISSING_FIELD = "missing field"
REASON_BAD_TIMESTAMP = "timestamp not finite and non-negative"
REASON_EMPTY_TOKEN = "empty sniffer or device token"
REASON_BAD_RSSI = "rssi not a number"
REASON_POSITIVE_RSSI = "positive rssi"


@dataclass(frozen=True, slots=True)
class PacketRecord:
    """One captured advertising packet."""

    ts: float
    sniffer: str
    device: str
    rssi: int


@dataclass(frozen=True)
class Deployment:
    """The fixed sniffer installation plus an optional device allowlist."""

    sniffer_ids: tuple[str, ...]
    device_allowlist: frozenset[str] | None = None

    def __post_init__(self):
        if not self.sniffer_ids:
            raise ValueError("deployment needs at least one sniffer")
        if len(set(self.sniffer_ids)) != len(self.sniffer_ids):
            raise ValueError("duplicate sniffer ids in deployment")


@dataclass(frozen=True, slots=True)
class RejectEntry:
    line: int
    reason: str


@dataclass
class ParseResult:
    records: list[PacketRecord] = field(default_factory=list)
    rejects: list[RejectEntry] = field(default_factory=list)

    @property
    def line_count(self) -> int:
        return len(self.records) + len(self.rejects)


@dataclass
class FilterResult:
    records: list[PacketRecord]
    dropped_unknown_sniffer: int = 0
    dropped_not_allowed: int = 0


def round_rssi(value: float) -> int:
    """Round a fractional dBm reading half-away-from-zero to integer dBm."""
    return int(math.trunc(value + math.copysign(0.5, value)))


def _validate(ts, sniffer, device, rssi) -> str | None:
    if ts is None or sniffer is None or device is None or rssi is None:
        return REASON_MISSING_FIELD
    try:
        ts = float(ts)
    except (TypeError, ValueError):
        return REASON_BAD_TIMESTAMP
    if not math.isfinite(ts) or ts < 0:
        return REASON_BAD_TIMESTAMP
    if not isinstance(sniffer, str) or not isinstance(device, str) or not sniffer or not device:
        return REASON_EMPTY_TOKEN
    try:
        rssi = float(rssi)
    except (TypeError, ValueError):
        return REASON_BAD_RSSI
    if not math.isfinite(rssi):
        return REASON_BAD_RSSI
    if rssi > 0:
        return REASON_POSITIVE_RSSI
    return None


def _make_record(ts, sniffer, device, rssi) -> PacketRecord:
    return PacketRecord(float(ts), sniffer, device, round_rssi(float(rssi)))


def parse_packet_log(stream: IO | Iterable[str], format: str = "jsonl") -> ParseResult:
    """Parse a packet log into accepted records plus a rejects report.

    Every well-formed line yields one record, in line order.  Corrupt lines
    are recorded as rejects and parsing continues.  An empty stream yields
    an empty result, not an error.
    """
    if format == "jsonl":
        return _parse_jsonl(stream)
    if format == "csv":
        return _parse_csv(stream)
    raise ValueError(f"unknown packet log format: {format!r}")


def _parse_jsonl(stream) -> ParseResult:
    result = ParseResult()
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except (json.JSONDecodeError, ValueError):
            result.rejects.append(RejectEntry(lineno, REASON_BAD_JSON))
            continue
        if not isinstance(obj, dict):
            result.rejects.append(RejectEntry(lineno, REASON_BAD_JSON))
            continue
        ts, sniffer, device, rssi = (obj.get(k) for k in JSONL_FIELDS)
        reason = _validate(ts, sniffer, device, rssi)
        if reason is not None:
            result.rejects.append(RejectEntry(lineno, reason))
        else:
            result.records.append(_make_record(ts, sniffer, device, rssi))
    return result


def _parse_csv(stream) -> ParseResult:
    result = ParseResult()
    reader = csv.reader(stream)
    header_seen = False
    lineno = 0
    for row in reader:
        lineno += 1
        if not header_seen:
            header_seen = True
            continue  # header row is required and not counted as data
        if len(row) != 4:
            result.rejects.append(RejectEntry(lineno, REASON_BAD_CSV))
            continue
        ts, sniffer, device, rssi = row
        try:
            ts_val = float(ts)
            rssi_val = float(rssi)
        except ValueError:
            result.rejects.append(RejectEntry(lineno, REASON_BAD_CSV))
            continue
        reason = _validate(ts_val, sniffer, device, rssi_val)
        if reason is not None:
            result.rejects.append(RejectEntry(lineno, reason))
        else:
            result.records.append(_make_record(ts_val, sniffer, device, rssi_val))
    return result


def filter_devices(records: Sequence[PacketRecord], deployment: Deployment) -> FilterResult:
    """Keep allowlisted devices seen by deployed sniffers.

    With no allowlist the device filter is the identity; records from
    sniffers outside the deployment are always dropped and counted.
    """
    known = set(deployment.sniffer_ids)
    allow = deployment.device_allowlist
    out = FilterResult(records=[])
    for rec in records:
        if rec.sniffer not in known:
            out.dropped_unknown_sniffer += 1
            continue
        if allow is not None and rec.device not in allow:
            out.dropped_not_allowed += 1
            continue
        out.records.append(rec)
    return out


def record_to_json(rec: PacketRecord) -> str:
    return json.dumps({"ts": rec.ts, "sniffer": rec.sniffer, "device": rec.device, "rssi": rec.rssi})


def write_jsonl(records: Iterable[PacketRecord], stream: IO) -> int:
    n = 0
    for rec in records:
        stream.write(record_to_json(rec))
        stream.write("\n")
        n += 1
    return n


def write_rejects(rejects: Iterable[RejectEntry], stream: IO) -> int:
    n = 0
    for rej in rejects:
        stream.write(json.dumps({"line": rej.line, "reason": rej.reason}))
        stream.write("\n")
        n += 1
    return n


def load_packet_table(path: str, format: str = "jsonl"):
    """Bulk loader for large logs; returns (polars.DataFrame, rejects).

    Vectorized twin of :func:`parse_packet_log` used by the CLI for
    multi-million-line logs.  The frame has columns ts/sniffer/device/rssi
    with rssi rounded half-away-from-zero.  Falls back to the streaming
    parser when the file is not uniformly well-formed.
    """
    import polars as pl

    try:
        if format == "jsonl":
            df = pl.read_ndjson(
                path,
                schema={"ts": pl.Float64, "sniffer": pl.Utf8, "device": pl.Utf8, "rssi": pl.Float64},
            )
        elif format == "csv":
            df = pl.read_csv(
                path,
                schema_overrides={"ts": pl.Float64, "sniffer": pl.Utf8, "device": pl.Utf8, "rssi": pl.Float64},
            )
        else:
            raise ValueError(f"unknown packet log format: {format!r}")
    except (pl.exceptions.ComputeError, pl.exceptions.SchemaError):
        # Mixed/corrupt lines: take the line-by-line path.
        with open(path, "r", encoding="utf-8") as fh:
            parsed = parse_packet_log(fh, format=format)
        df = pl.DataFrame(
            {
                "ts": [r.ts for r in parsed.records],
                "sniffer": [r.sniffer for r in parsed.records],
                "device": [r.device for r in parsed.records],
                "rssi": [float(r.rssi) for r in parsed.records],
            },
            schema={"ts": pl.Float64, "sniffer": pl.Utf8, "device": pl.Utf8, "rssi": pl.Float64},
        )
        return df.with_columns(pl.col("rssi").cast(pl.Int64)), list(parsed.rejects)

    df = df.with_row_index("line", offset=1 if format == "jsonl" else 2)
    bad_ts = pl.col("ts").is_null() | pl.col("ts").is_nan() | (pl.col("ts") < 0)
    bad_token = (
        pl.col("sniffer").is_null()
        | pl.col("device").is_null()
        | (pl.col("sniffer").str.len_bytes() == 0)
        | (pl.col("device").str.len_bytes() == 0)
    )
    bad_rssi = pl.col("rssi").is_null() | pl.col("rssi").is_nan()
    pos_rssi = pl.col("rssi") > 0

    reason = (
        pl.when(bad_ts.fill_null(True))
        .then(pl.lit(REASON_BAD_TIMESTAMP))
        .when(bad_token)
        .then(pl.lit(REASON_EMPTY_TOKEN))
        .when(bad_rssi.fill_null(True))
        .then(pl.lit(REASON_BAD_RSSI))
        .when(pos_rssi)
        .then(pl.lit(REASON_POSITIVE_RSSI))
        .otherwise(pl.lit(None))
        .alias("reason")
    )
    df = df.with_columns(reason)
    rejects = [
        RejectEntry(int(line), why)
        for line, why in df.filter(pl.col("reason").is_not_null()).select("line", "reason").iter_rows()
    ]
    accepted = (
        df.filter(pl.col("reason").is_null())
        .select("ts", "sniffer", "device", "rssi")
        .with_columns(
            # round half away from zero; rssi is <= 0 here
            (pl.col("rssi") - 0.5).ceil().cast(pl.Int64).alias("rssi")
        )
    )
    return accepted, rejects
