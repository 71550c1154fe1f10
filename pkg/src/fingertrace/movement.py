"""Static/dynamic status, pairwise space correlation, and group assembly.

A person is Static in window T when the top-k prefix of their fingerprint
matches the prefix at the most recent earlier window with data (within
``gap_max`` windows), Dynamic when it differs, and Unknown when either
fingerprint is missing.  Two Dynamic people are correlated when their
prefixes agree both now and at their respective reference windows; per
window, movement groups are the connected components of that pairwise
relation, singletons being alone walks.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import IO, Iterable

from fingertrace.fingerprint import FingerprintSeries, prefix

DEFAULT_K = 1
DEFAULT_GAP_MAX = 3


class Status(Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class GroupEvent:
    """One window's partition of its Dynamic people into movement groups."""

    window: int
    groups: tuple[tuple[str, ...], ...]

    def members(self) -> set[str]:
        return {p for g in self.groups for p in g}

    def group_of(self, person: str) -> tuple[str, ...] | None:
        for g in self.groups:
            if person in g:
                return g
        return None


@dataclass
class MovementLedger:
    """Per-person movement windows: all of them, and the together subset."""

    moving: dict[str, set[int]] = field(default_factory=dict)
    together: dict[str, set[int]] = field(default_factory=dict)

    def record(self, person: str, window: int, group_size: int) -> None:
        self.moving.setdefault(person, set()).add(window)
        if group_size >= 2:
            self.together.setdefault(person, set()).add(window)


class UnionFind:
    """Disjoint sets with path compression, for component assembly."""

    def __init__(self, items: Iterable[str] = ()):
        self.parent = {x: x for x in items}

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def components(self) -> list[list[str]]:
        groups: dict[str, list[str]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(g) for g in groups.values()]


def reference_window(series: FingerprintSeries, window: int, gap_max: int = DEFAULT_GAP_MAX) -> int | None:
    """Most recent window < T with a fingerprint, no further back than gap_max."""
    if gap_max < 1:
        raise ValueError("gap_max must be >= 1")
    for w in range(window - 1, window - gap_max - 1, -1):
        if w in series.entries:
            return w
    return None


def status(
    series: FingerprintSeries,
    window: int,
    k: int = DEFAULT_K,
    gap_max: int = DEFAULT_GAP_MAX,
) -> Status:
    fp = series.entries.get(window)
    if fp is None:
        return Status.UNKNOWN
    ref = reference_window(series, window, gap_max)
    if ref is None:
        return Status.UNKNOWN
    if prefix(fp, k) == prefix(series.entries[ref], k):
        return Status.STATIC
    return Status.DYNAMIC


def correlated(
    series_i: FingerprintSeries,
    series_j: FingerprintSeries,
    window: int,
    k: int = DEFAULT_K,
    gap_max: int = DEFAULT_GAP_MAX,
) -> bool:
    """Space correlation: equal prefixes now and at each person's reference."""
    fp_i, fp_j = series_i.entries.get(window), series_j.entries.get(window)
    if fp_i is None or fp_j is None:
        return False
    ref_i = reference_window(series_i, window, gap_max)
    ref_j = reference_window(series_j, window, gap_max)
    if ref_i is None or ref_j is None:
        return False
    return prefix(fp_i, k) == prefix(fp_j, k) and prefix(
        series_i.entries[ref_i], k
    ) == prefix(series_j.entries[ref_j], k)


def detect_groups(
    series_map: dict[str, FingerprintSeries],
    k: int = DEFAULT_K,
    gap_max: int = DEFAULT_GAP_MAX,
) -> tuple[list[GroupEvent], MovementLedger]:
    """Partition each window's Dynamic people into movement groups.

    The pairwise together relation (both Dynamic and correlated) is
    symmetric; groups are its connected components, so the result does not
    depend on person enumeration order.  Unknown and Static people never
    join groups.
    """
    if not series_map:
        raise ValueError("need at least one fingerprint series")
    windows = sorted({w for s in series_map.values() for w in s.entries})
    events: list[GroupEvent] = []
    ledger = MovementLedger()
    for w in windows:
        dynamic = [
            p for p in sorted(series_map)
            if status(series_map[p], w, k, gap_max) is Status.DYNAMIC
        ]
        if not dynamic:
            continue
        uf = UnionFind(dynamic)
        for pi, pj in combinations(dynamic, 2):
            if correlated(series_map[pi], series_map[pj], w, k, gap_max):
                uf.union(pi, pj)
        groups = tuple(tuple(g) for g in sorted(uf.components()))
        events.append(GroupEvent(w, groups))
        for g in groups:
            for p in g:
                ledger.record(p, w, len(g))
    return events, ledger


def movement_runs(ledger: MovementLedger, merge: bool = False) -> dict[str, list[tuple[int, int]]]:
    """Per-person movement events as (first_window, last_window) spans.

    merge=False counts every Dynamic window as its own event; merge=True
    collapses each maximal run of consecutive Dynamic windows into one.
    """
    out: dict[str, list[tuple[int, int]]] = {}
    for person, windows in sorted(ledger.moving.items()):
        ordered = sorted(windows)
        if not merge:
            out[person] = [(w, w) for w in ordered]
            continue
        runs: list[tuple[int, int]] = []
        start = prev = ordered[0]
        for w in ordered[1:]:
            if w == prev + 1:
                prev = w
                continue
            runs.append((start, prev))
            start = prev = w
        runs.append((start, prev))
        out[person] = runs
    return out


def write_group_events(events: Iterable[GroupEvent], stream: IO) -> None:
    """JSONL export: {window, groups: [[device, ...], ...]}."""
    for ev in events:
        stream.write(json.dumps({"window": ev.window, "groups": [list(g) for g in ev.groups]}))
        stream.write("\n")


def read_group_events(stream) -> list[GroupEvent]:
    events = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        events.append(GroupEvent(int(obj["window"]), tuple(tuple(g) for g in obj["groups"])))
    return events


def write_ledger(ledger: MovementLedger, events: Iterable[GroupEvent], stream: IO) -> None:
    """CSV export: device, window, in_group_size."""
    size_at: dict[tuple[str, int], int] = {}
    for ev in events:
        for g in ev.groups:
            for p in g:
                size_at[(p, ev.window)] = len(g)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["device", "window", "in_group_size"])
    for person in sorted(ledger.moving):
        for w in sorted(ledger.moving[person]):
            writer.writerow([person, w, size_at.get((person, w), 1)])
