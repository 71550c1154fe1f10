"""Pairwise mobility measures: fingerprint similarity, MI, and TMI.

Similarity rewards positional fingerprint matches with 7/2/1 points,
stopping at the first mismatch; the per-window maximum is fixed by the
deployment size, not by individual list lengths.  MI is the share of one
person's movement events that are joint with another; TMI restricts the
denominator to events in groups of size two or more.  Undefined values
(empty denominators) are surfaced explicitly and never coerced to 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import permutations
from typing import IO, Iterable, Sequence

from fingertrace.fingerprint import FingerprintSeries
from fingertrace.movement import GroupEvent, MovementLedger

DEFAULT_WEIGHTS = (7.0, 2.0, 1.0)
DEFAULT_GRAPH_THRESHOLD = 0.1


class UndefinedMetricError(ValueError):
    """The metric's denominator is empty; there is no data to score."""


@dataclass(frozen=True)
class SimilarityWeights:
    position_weights: tuple[float, ...] = DEFAULT_WEIGHTS

    def __post_init__(self):
        if not self.position_weights or any(w <= 0 for w in self.position_weights):
            raise ValueError("position weights must be non-empty and strictly positive")


@dataclass(frozen=True)
class EvaluationSpan:
    windows: tuple[int, ...]

    def __post_init__(self):
        if not self.windows:
            raise ValueError("evaluation span must be non-empty")


@dataclass(frozen=True)
class MatrixEntry:
    p_from: str
    p_to: str
    metric: str
    value: float | None

    @property
    def defined(self) -> bool:
        return self.value is not None


def similarity_score(
    series_i: FingerprintSeries,
    series_j: FingerprintSeries,
    span: EvaluationSpan | None = None,
    weights: SimilarityWeights | Sequence[float] = DEFAULT_WEIGHTS,
    n_sniffers: int | None = None,
) -> float:
    """Prefix-weighted fingerprint similarity over a span, in [0, 1].

    Windows where both series have no measurements are excluded; every
    other window contributes the full deployment maximum to the
    denominator.  Matches accrue positionally and stop at the first
    mismatch.  A position missing from both lists counts as a match (both
    agree nothing was heard there), so identical series always score 1.0;
    a position missing from only one side is a mismatch.  Symmetric by
    construction.
    """
    if not isinstance(weights, SimilarityWeights):
        weights = SimilarityWeights(tuple(float(w) for w in weights))
    if n_sniffers is None:
        n_sniffers = len(series_i.sniffers() | series_j.sniffers())
    if n_sniffers < 1:
        raise ValueError("n_sniffers must be >= 1")
    effective = weights.position_weights[: min(len(weights.position_weights), n_sniffers)]
    max_per_window = sum(effective)

    if span is None:
        windows: Iterable[int] = sorted(set(series_i.entries) | set(series_j.entries))
    else:
        windows = span.windows

    earned = 0.0
    maximum = 0.0
    for w in windows:
        fp_i = series_i.entries.get(w)
        fp_j = series_j.entries.get(w)
        if fp_i is None and fp_j is None:
            continue
        maximum += max_per_window
        if fp_i is None or fp_j is None:
            continue
        for pos, weight in enumerate(effective):
            in_i = pos < len(fp_i.sniffers)
            in_j = pos < len(fp_j.sniffers)
            if in_i and in_j and fp_i.sniffers[pos] == fp_j.sniffers[pos]:
                earned += weight
            elif not in_i and not in_j:
                earned += weight
            else:
                break
    if maximum == 0:
        raise UndefinedMetricError(
            f"no window with measurements for pair ({series_i.device}, {series_j.device})"
        )
    return earned / maximum


def _same_group_windows(events: Sequence[GroupEvent], p_i: str, p_j: str) -> set[int]:
    out = set()
    for ev in events:
        for g in ev.groups:
            if p_i in g and p_j in g:
                out.add(ev.window)
                break
    return out


def _runs_of(windows: set[int]) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    ordered = sorted(windows)
    if not ordered:
        return runs
    start = prev = ordered[0]
    for w in ordered[1:]:
        if w == prev + 1:
            prev = w
            continue
        runs.append((start, prev))
        start = prev = w
    runs.append((start, prev))
    return runs


def _intersection(
    ledger: MovementLedger,
    events: Sequence[GroupEvent],
    p_i: str,
    p_j: str,
    denominator: set[int],
    merge_runs: bool,
) -> float | None:
    if not denominator:
        return None
    shared = _same_group_windows(events, p_i, p_j)
    if not merge_runs:
        return len(shared & denominator) / len(denominator)
    runs = _runs_of(denominator)
    joint = sum(1 for a, b in runs if any(w in shared for w in range(a, b + 1)))
    return joint / len(runs)


def movement_intersection(
    ledger: MovementLedger,
    events: Sequence[GroupEvent],
    p_i: str,
    p_j: str,
    merge_runs: bool = False,
) -> float | None:
    """MI: share of p_i's movement events that are joint with p_j.

    Directional; alone walks count in the denominator.  None when p_i has
    no movements at all (no data, distinct from 0).
    """
    return _intersection(ledger, events, p_i, p_j, ledger.moving.get(p_i, set()), merge_runs)


def together_movement_intersection(
    ledger: MovementLedger,
    events: Sequence[GroupEvent],
    p_i: str,
    p_j: str,
    merge_runs: bool = False,
) -> float | None:
    """TMI: like MI but the denominator keeps only group events (size >= 2)."""
    return _intersection(ledger, events, p_i, p_j, ledger.together.get(p_i, set()), merge_runs)


def pairwise_matrix(
    metric: str,
    people: Sequence[str],
    series_map: dict[str, FingerprintSeries] | None = None,
    ledger: MovementLedger | None = None,
    events: Sequence[GroupEvent] | None = None,
    span: EvaluationSpan | None = None,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    n_sniffers: int | None = None,
    merge_runs: bool = False,
) -> list[MatrixEntry]:
    """Directional pairwise matrix for one metric, undefined values kept."""
    rows: list[MatrixEntry] = []
    for p_i, p_j in permutations(sorted(people), 2):
        if metric == "similarity":
            assert series_map is not None
            try:
                value = similarity_score(series_map[p_i], series_map[p_j], span, weights, n_sniffers)
            except UndefinedMetricError:
                value = None
        elif metric == "mi":
            assert ledger is not None and events is not None
            value = movement_intersection(ledger, events, p_i, p_j, merge_runs)
        elif metric == "tmi":
            assert ledger is not None and events is not None
            value = together_movement_intersection(ledger, events, p_i, p_j, merge_runs)
        else:
            raise ValueError(f"unknown metric: {metric!r}")
        rows.append(MatrixEntry(p_i, p_j, metric, value))
    return rows


def write_matrix(rows: Iterable[MatrixEntry], stream: IO) -> None:
    """CSV export: p_from, p_to, metric, value, defined."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["p_from", "p_to", "metric", "value", "defined"])
    for row in rows:
        writer.writerow(
            [row.p_from, row.p_to, row.metric, "" if row.value is None else repr(row.value), row.defined]
        )


def read_matrix(stream) -> list[MatrixEntry]:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["p_from", "p_to", "metric", "value", "defined"]:
        raise ValueError("not a pairwise matrix CSV")
    rows = []
    for p_from, p_to, metric, value, defined in reader:
        rows.append(MatrixEntry(p_from, p_to, metric, float(value) if defined == "True" else None))
    return rows
