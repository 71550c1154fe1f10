"""Command line pipeline: simulate, analyze, metrics, graph, report.

Every stage persists its intermediates as JSONL/CSV so each phase of the
pipeline can be audited and golden-file tested.  All commands are
deterministic given their inputs and seed.  Set FINGERTRACE_LOG=debug for
verbose logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from fingertrace import fingerprint, ingest, metrics, movement, sim, socialgraph, windowing

log = logging.getLogger("fingertrace")

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _setup_logging() -> None:
    level = os.environ.get("FINGERTRACE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def cmd_simulate(args) -> int:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        cfg = sim.ScenarioConfig.from_json(path.read_text())
    else:
        cfg = sim.preset(args.preset)
    if args.seed is not None:
        cfg = sim.with_seed(cfg, args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = sim.generate_packet_table(cfg)
    table.write_ndjson(out / "packets.jsonl")
    truth = sim.ground_truth(cfg, window_len=args.window_len)
    with open(out / "ground_truth.jsonl", "w") as fh:
        sim.write_ground_truth(truth, fh)
    (out / "scenario.json").write_text(cfg.to_json())
    print(f"devices={len(cfg.devices)} sniffers={len(cfg.sniffers)} packets={table.height} out={out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    log_path = Path(args.log)
    if not log_path.exists():
        raise CliError(f"packet log not found: {log_path}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    table, rejects = ingest.load_packet_table(str(log_path), format=args.format)
    if table.height == 0:
        raise CliError("no accepted packet records in input", EXIT_DATA)
    with open(out / "rejects.jsonl", "w") as fh:
        ingest.write_rejects(rejects, fh)

    windowed = windowing.aggregate_table(table, window_len=args.window_len)
    with open(out / "windowed.csv", "w") as fh:
        windowing.write_cells(windowed, fh)

    series_map = fingerprint.build_fingerprints(windowed)
    with open(out / "fingerprints.jsonl", "w") as fh:
        fingerprint.write_fingerprints(series_map, fh)

    events, ledger = movement.detect_groups(series_map, k=args.k, gap_max=args.gap_max)
    with open(out / "group_events.jsonl", "w") as fh:
        movement.write_group_events(events, fh)
    with open(out / "ledger.csv", "w") as fh:
        movement.write_ledger(ledger, events, fh)

    meta = {
        "window_len": windowed.spec.window_len,
        "origin": windowed.spec.origin,
        "k": args.k,
        "gap_max": args.gap_max,
        "n_sniffers": len(windowed.sniffers()),
        "devices": windowed.devices(),
        "accepted": table.height,
        "rejected": len(rejects),
        "dropped_early": windowed.dropped_early,
    }
    (out / "analysis.json").write_text(json.dumps(meta, indent=2))
    print(
        f"accepted={table.height} rejected={len(rejects)} devices={len(meta['devices'])} "
        f"windows={len({w for _, w in windowed.cells})} events={len(events)} out={out}"
    )
    return EXIT_OK


def _load_analysis(dir_path: Path):
    meta_path = dir_path / "analysis.json"
    if not meta_path.exists():
        raise CliError(f"not an analysis directory (missing analysis.json): {dir_path}")
    meta = json.loads(meta_path.read_text())
    with open(dir_path / "fingerprints.jsonl") as fh:
        series_map = fingerprint.read_fingerprints(fh)
    with open(dir_path / "group_events.jsonl") as fh:
        events = movement.read_group_events(fh)
    ledger = movement.MovementLedger()
    for ev in events:
        for g in ev.groups:
            for p in g:
                ledger.record(p, ev.window, len(g))
    return meta, series_map, events, ledger


def cmd_metrics(args) -> int:
    dir_path = Path(args.analysis_dir)
    meta, series_map, events, ledger = _load_analysis(dir_path)
    span = None
    if args.span:
        try:
            a, b = args.span.split(":")
            span = metrics.EvaluationSpan(tuple(range(int(a), int(b) + 1)))
        except ValueError as exc:
            raise CliError(f"bad span {args.span!r}, expected FIRST:LAST") from exc
    weights = tuple(float(w) for w in args.weights.split(","))
    rows = metrics.pairwise_matrix(
        args.metric,
        people=sorted(series_map),
        series_map=series_map,
        ledger=ledger,
        events=events,
        span=span,
        weights=weights,
        n_sniffers=meta["n_sniffers"],
        merge_runs=args.merge_runs,
    )
    with open(args.out, "w") as fh:
        metrics.write_matrix(rows, fh)
    defined = sum(1 for r in rows if r.defined)
    print(f"metric={args.metric} pairs={len(rows)} defined={defined} out={args.out}")
    return EXIT_OK


def cmd_graph(args) -> int:
    matrix_path = Path(args.matrix)
    if not matrix_path.exists():
        raise CliError(f"matrix file not found: {matrix_path}")
    if not 0.0 <= args.threshold <= 1.0:
        raise CliError(f"threshold must be within [0, 1], got {args.threshold}")
    rooms = None
    if args.rooms:
        rooms = json.loads(Path(args.rooms).read_text())
    with open(matrix_path) as fh:
        rows = metrics.read_matrix(fh)
    graph = socialgraph.build_graph(rows, threshold=args.threshold, rooms=rooms)
    data = socialgraph.export_graph(graph, format=args.format)
    Path(args.out).write_bytes(data)
    print(f"nodes={len(graph.nodes)} edges={len(graph.edges)} out={args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    dir_path = Path(args.analysis_dir)
    meta, series_map, events, ledger = _load_analysis(dir_path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    runs = movement.movement_runs(ledger, merge=args.merge_runs)
    histogram: dict[int, int] = {}
    if args.merge_runs:
        # size of a merged run = max group size over its windows
        size_at = {}
        for ev in events:
            for g in ev.groups:
                for p in g:
                    size_at[(p, ev.window)] = len(g)
        counted = set()
        for person, spans in runs.items():
            for a, b in spans:
                size = max(size_at.get((person, w), 1) for w in range(a, b + 1))
                histogram[size] = histogram.get(size, 0) + 1
    else:
        for ev in events:
            for g in ev.groups:
                histogram[len(g)] = histogram.get(len(g), 0) + 1
    with open(out / "movement_histogram.csv", "w") as fh:
        fh.write("group_size,count\n")
        for size in sorted(histogram):
            fh.write(f"{size},{histogram[size]}\n")

    spec = windowing.WindowSpec(meta["window_len"], meta["origin"])
    import csv as _csv

    with open(dir_path / "windowed.csv") as fh:
        reader = _csv.reader(fh)
        next(reader)
        windowed = windowing.read_cells(reader, spec)
    for device in windowed.devices():
        with open(out / f"signal_{device}.csv", "w") as fh:
            windowing.write_signal_matrix(windowed, device, fh)
    print(f"histogram_sizes={len(histogram)} devices={len(windowed.devices())} out={out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fingertrace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic packet log with ground truth")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sim.PRESET_NAMES)
    src.add_argument("--config", help="scenario config JSON path")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--window-len", type=float, default=20.0, help="ground-truth window length (s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="packet log -> fingerprints, group events, ledger")
    p.add_argument("log")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--window-len", type=float, default=20.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gap-max", type=int, default=3)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("metrics", help="pairwise similarity / MI / TMI matrix")
    p.add_argument("analysis_dir")
    p.add_argument("--metric", choices=("similarity", "mi", "tmi"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--weights", default="7,2,1")
    p.add_argument("--span", default=None, help="window range FIRST:LAST")
    p.add_argument("--merge-runs", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("graph", help="social graph from a pairwise matrix")
    p.add_argument("matrix")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--format", choices=socialgraph.EXPORT_FORMATS, default="json")
    p.add_argument("--rooms", default=None, help="JSON file mapping person -> room label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("report", help="movement histogram and signal matrices")
    p.add_argument("analysis_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--merge-runs", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
