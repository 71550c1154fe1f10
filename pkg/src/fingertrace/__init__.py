"""Group mobility detection from wireless sniffer packet logs.

The pipeline turns raw (timestamp, sniffer, device, rssi) packet captures
into per-window wireless fingerprints, static/dynamic movement statuses,
movement groups, pairwise mobility metrics, and social graphs.  A scenario
simulator with known ground truth makes the whole chain testable without
radio hardware.
"""

from fingertrace.ingest import PacketRecord, Deployment, parse_packet_log, filter_devices
from fingertrace.windowing import WindowSpec, WindowedRssi, aggregate, signal_matrix
from fingertrace.fingerprint import Fingerprint, FingerprintSeries, build_fingerprints, prefix
from fingertrace.movement import Status, GroupEvent, MovementLedger, detect_groups, movement_runs
from fingertrace.metrics import (
    UndefinedMetricError,
    similarity_score,
    movement_intersection,
    together_movement_intersection,
    pairwise_matrix,
)
from fingertrace.socialgraph import SocialGraph, build_graph, export_graph
from fingertrace.sim import ScenarioConfig, DeviceScript, GroundTruth, rssi_model, generate_scenario, evaluate, preset

__all__ = [
    "PacketRecord",
    "Deployment",
    "parse_packet_log",
    "filter_devices",
    "WindowSpec",
    "WindowedRssi",
    "aggregate",
    "signal_matrix",
    "Fingerprint",
    "FingerprintSeries",
    "build_fingerprints",
    "prefix",
    "Status",
    "GroupEvent",
    "MovementLedger",
    "detect_groups",
    "movement_runs",
    "UndefinedMetricError",
    "similarity_score",
    "movement_intersection",
    "together_movement_intersection",
    "pairwise_matrix",
    "SocialGraph",
    "build_graph",
    "export_graph",
    "ScenarioConfig",
    "DeviceScript",
    "GroundTruth",
    "rssi_model",
    "generate_scenario",
    "evaluate",
    "preset",
]

__version__ = "0.1.0"
