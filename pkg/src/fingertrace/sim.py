"""Scenario simulator with known ground truth.

Devices follow piecewise-linear waypoint scripts and broadcast at a fixed
advertising interval; each sniffer independently captures every broadcast
with a distance-banded delivery probability and logs a log-distance
path-loss RSSI sample with Gaussian shadowing.  Ground truth (per-window
moving flags and group partitions from co-trajectory labels) is derived
from the same window grid the analysis uses, so detection results can be
scored exactly.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import IO, Sequence

import numpy as np

from fingertrace.ingest import PacketRecord
from fingertrace.movement import GroupEvent
from fingertrace.windowing import WindowSpec

DEFAULT_DELIVERY_BANDS = ((5.0, 0.95), (15.0, 0.7), (math.inf, 0.3))
MOVING_DISPLACEMENT_M = 1.0

PRESET_NAMES = ("controlled-10-beacons", "office-2-rooms", "two-groups-crossing")


@dataclass(frozen=True)
class DeviceScript:
    """Waypoint trajectory plus optional group labels and delivery override.

    waypoints: (time_s, x_m, y_m) with strictly increasing times; position
    is linearly interpolated and held constant outside the scripted range.
    group_labels: (t_start, t_end, label) segments; devices moving in the
    same window with equal labels form one ground-truth group.
    delivery_prob: when set, a constant per-packet capture probability that
    replaces the distance bands for this device.
    """

    device: str
    waypoints: tuple[tuple[float, float, float], ...]
    group_labels: tuple[tuple[float, float, str], ...] = ()
    delivery_prob: float | None = None

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError(f"{self.device}: script needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"{self.device}: waypoint times must be strictly increasing")
        if self.delivery_prob is not None and not 0.0 <= self.delivery_prob <= 1.0:
            raise ValueError(f"{self.device}: delivery_prob must be in [0, 1]")

    def positions(self, times: np.ndarray) -> np.ndarray:
        """(len(times), 2) array of interpolated positions."""
        wt = np.array([w[0] for w in self.waypoints])
        wx = np.array([w[1] for w in self.waypoints])
        wy = np.array([w[2] for w in self.waypoints])
        return np.column_stack((np.interp(times, wt, wx), np.interp(times, wt, wy)))

    def label_at(self, t: float) -> str | None:
        for t0, t1, label in self.group_labels:
            if t0 <= t < t1:
                return label
        return None


@dataclass(frozen=True)
class ScenarioConfig:
    sniffers: tuple[tuple[str, float, float], ...]  # (id, x, y)
    devices: tuple[DeviceScript, ...]
    duration: float
    advertising_interval: float = 0.1
    tx_power_dbm: float = 4.0
    pl0_db: float = 40.0
    d0_m: float = 1.0
    path_loss_exp: float = 2.2
    shadow_sigma_db: float = 4.0
    delivery_bands: tuple[tuple[float, float], ...] = DEFAULT_DELIVERY_BANDS
    seed: int = 0

    def __post_init__(self):
        if not self.sniffers or not self.devices:
            raise ValueError("scenario needs at least one sniffer and one device")
        if len({s[0] for s in self.sniffers}) != len(self.sniffers):
            raise ValueError("duplicate sniffer ids")
        if self.advertising_interval <= 0:
            raise ValueError("advertising_interval must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow sigma must be >= 0")
        if any(not 0.0 <= p <= 1.0 for _, p in self.delivery_bands):
            raise ValueError("delivery probabilities must lie in [0, 1]")

    def to_json(self) -> str:
        doc = {
            "sniffers": [list(s) for s in self.sniffers],
            "devices": [
                {
                    "device": d.device,
                    "waypoints": [list(w) for w in d.waypoints],
                    "group_labels": [list(g) for g in d.group_labels],
                    "delivery_prob": d.delivery_prob,
                }
                for d in self.devices
            ],
            "duration": self.duration,
            "advertising_interval": self.advertising_interval,
            "tx_power_dbm": self.tx_power_dbm,
            "pl0_db": self.pl0_db,
            "d0_m": self.d0_m,
            "path_loss_exp": self.path_loss_exp,
            "shadow_sigma_db": self.shadow_sigma_db,
            "delivery_bands": [
                [("inf" if math.isinf(d) else d), p] for d, p in self.delivery_bands
            ],
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2)

    @staticmethod
    def from_json(data: str | bytes) -> "ScenarioConfig":
        doc = json.loads(data)
        return ScenarioConfig(
            sniffers=tuple((s[0], float(s[1]), float(s[2])) for s in doc["sniffers"]),
            devices=tuple(
                DeviceScript(
                    device=d["device"],
                    waypoints=tuple(tuple(map(float, w)) for w in d["waypoints"]),
                    group_labels=tuple(
                        (float(g[0]), float(g[1]), g[2]) for g in d.get("group_labels", ())
                    ),
                    delivery_prob=d.get("delivery_prob"),
                )
                for d in doc["devices"]
            ),
            duration=float(doc["duration"]),
            advertising_interval=float(doc.get("advertising_interval", 0.1)),
            tx_power_dbm=float(doc.get("tx_power_dbm", 4.0)),
            pl0_db=float(doc.get("pl0_db", 40.0)),
            d0_m=float(doc.get("d0_m", 1.0)),
            path_loss_exp=float(doc.get("path_loss_exp", 2.2)),
            shadow_sigma_db=float(doc.get("shadow_sigma_db", 4.0)),
            delivery_bands=tuple(
                (math.inf if d == "inf" else float(d), float(p))
                for d, p in doc.get("delivery_bands", DEFAULT_DELIVERY_BANDS)
            ),
            seed=int(doc.get("seed", 0)),
        )


@dataclass(frozen=True)
class TruthWindow:
    moving: frozenset[str]
    groups: tuple[tuple[str, ...], ...]  # partition of the moving devices


@dataclass
class GroundTruth:
    window_len: float
    origin: float
    windows: dict[int, TruthWindow] = field(default_factory=dict)


@dataclass
class EvaluationReport:
    detection_rate: float | None
    grouping_accuracy: float | None
    pair_precision: float | None
    pair_recall: float | None
    truth_moving: int = 0
    detected_dynamic: int = 0


def _rssi_samples(distances: np.ndarray, cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    d = np.where(distances <= 0, cfg.d0_m, distances)
    level = cfg.tx_power_dbm - cfg.pl0_db - 10.0 * cfg.path_loss_exp * np.log10(d / cfg.d0_m)
    if cfg.shadow_sigma_db > 0:
        level = level + rng.normal(0.0, cfg.shadow_sigma_db, size=np.shape(d))
    rounded = np.trunc(level + np.copysign(0.5, level))
    return np.clip(rounded, -100, -1).astype(np.int64)


def rssi_model(distance: float, cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> int:
    """One integer-dBm sample of the log-distance shadowing model."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return int(_rssi_samples(np.asarray(float(distance)), cfg, rng))


def _delivery_probs(distances: np.ndarray, script: DeviceScript, cfg: ScenarioConfig) -> np.ndarray:
    if script.delivery_prob is not None:
        return np.full_like(distances, script.delivery_prob, dtype=float)
    probs = np.empty_like(distances, dtype=float)
    remaining = np.ones_like(distances, dtype=bool)
    for upper, p in cfg.delivery_bands:
        mask = remaining & (distances < upper)
        probs[mask] = p
        remaining &= ~mask
    probs[remaining] = cfg.delivery_bands[-1][1]
    return probs


def generate_arrays(cfg: ScenarioConfig) -> dict[str, np.ndarray]:
    """Vectorized packet generation; columns ts/sniffer/device/rssi sorted by
    (ts, device, sniffer)."""
    rng = np.random.default_rng(cfg.seed)
    # events at t = 0, interval, 2*interval, ... strictly below duration
    n_events = int(math.ceil(cfg.duration / cfg.advertising_interval))
    times = np.arange(n_events, dtype=float) * cfg.advertising_interval
    times = times[times < cfg.duration]
    ts_out, sn_out, dev_out, rssi_out = [], [], [], []
    for script in cfg.devices:
        pos = script.positions(times)
        for sid, sx, sy in cfg.sniffers:
            dist = np.hypot(pos[:, 0] - sx, pos[:, 1] - sy)
            captured = rng.random(times.shape) < _delivery_probs(dist, script, cfg)
            n_cap = int(captured.sum())
            if n_cap == 0:
                continue
            samples = _rssi_samples(dist[captured], cfg, rng)
            ts_out.append(times[captured])
            sn_out.append(np.full(n_cap, sid, dtype=object))
            dev_out.append(np.full(n_cap, script.device, dtype=object))
            rssi_out.append(samples)
    if not ts_out:
        return {
            "ts": np.empty(0), "sniffer": np.empty(0, dtype=object),
            "device": np.empty(0, dtype=object), "rssi": np.empty(0, dtype=np.int64),
        }
    ts = np.concatenate(ts_out)
    sniffer = np.concatenate(sn_out)
    device = np.concatenate(dev_out)
    rssi = np.concatenate(rssi_out)
    order = np.lexsort((sniffer, device, ts))
    return {"ts": ts[order], "sniffer": sniffer[order], "device": device[order], "rssi": rssi[order]}


def generate_packet_table(cfg: ScenarioConfig):
    """Packet log as a polars frame (bulk path for large scenarios)."""
    import polars as pl

    arrays = generate_arrays(cfg)
    return pl.DataFrame(
        {
            "ts": arrays["ts"],
            "sniffer": list(arrays["sniffer"]),
            "device": list(arrays["device"]),
            "rssi": arrays["rssi"],
        },
        schema={"ts": pl.Float64, "sniffer": pl.Utf8, "device": pl.Utf8, "rssi": pl.Int64},
    )


def ground_truth(cfg: ScenarioConfig, window_len: float = 20.0, origin: float = 0.0) -> GroundTruth:
    """Per-window moving flags and group partition from the scripts.

    A device is truly moving in a window when its displacement across the
    window exceeds 1 m; moving devices sharing a group label at the window
    midpoint form one group, others are singletons.
    """
    truth = GroundTruth(window_len, origin)
    n_windows = int(math.ceil((cfg.duration - origin) / window_len))
    for w in range(n_windows):
        t0 = origin + w * window_len
        t1 = min(t0 + window_len, cfg.duration)
        mid = (t0 + t1) / 2.0
        endpoints = np.array([t0, t1])
        moving: set[str] = set()
        labels: dict[str, str | None] = {}
        for script in cfg.devices:
            p = script.positions(endpoints)
            if float(np.hypot(*(p[1] - p[0]))) > MOVING_DISPLACEMENT_M:
                moving.add(script.device)
                labels[script.device] = script.label_at(mid)
        by_label: dict[str, list[str]] = {}
        singles: list[tuple[str, ...]] = []
        for dev in sorted(moving):
            label = labels[dev]
            if label is None:
                singles.append((dev,))
            else:
                by_label.setdefault(label, []).append(dev)
        groups = sorted([tuple(g) for g in by_label.values()] + singles)
        truth.windows[w] = TruthWindow(frozenset(moving), tuple(groups))
    return truth


def generate_scenario(
    cfg: ScenarioConfig, window_len: float = 20.0
) -> tuple[list[PacketRecord], GroundTruth]:
    """Packet log plus ground truth on the analysis window grid."""
    arrays = generate_arrays(cfg)
    records = [
        PacketRecord(float(t), str(s), str(d), int(r))
        for t, s, d, r in zip(arrays["ts"], arrays["sniffer"], arrays["device"], arrays["rssi"])
    ]
    return records, ground_truth(cfg, window_len=window_len)


def evaluate(
    events: Sequence[GroupEvent],
    truth: GroundTruth,
    spec: WindowSpec,
) -> EvaluationReport:
    """Score detected group events against ground truth.

    detection_rate: truth-moving (person, window) pairs detected Dynamic.
    grouping_accuracy: detected-Dynamic pairs whose detected group equals
    the truth group restricted to detected-Dynamic people.
    pair_precision/recall: the pairwise together relation vs truth.
    """
    if spec.window_len != truth.window_len or spec.origin != truth.origin:
        raise ValueError("window spec of the analysis does not match the ground truth")

    detected: dict[int, dict[str, tuple[str, ...]]] = {}
    for ev in events:
        per = detected.setdefault(ev.window, {})
        for g in ev.groups:
            for p in g:
                per[p] = g

    truth_moving = 0
    hits = 0
    grouped_total = 0
    grouped_hits = 0
    pred_pairs: set[tuple[int, str, str]] = set()
    true_pairs: set[tuple[int, str, str]] = set()

    for w, tw in truth.windows.items():
        per = detected.get(w, {})
        truth_group_of = {p: g for g in tw.groups for p in g}
        truth_moving += len(tw.moving)
        hits += sum(1 for p in tw.moving if p in per)
        dyn = set(per)
        for p, g in per.items():
            expected = truth_group_of.get(p, (p,))
            expected_dyn = tuple(sorted(set(expected) & dyn | {p}))
            grouped_total += 1
            if tuple(sorted(g)) == expected_dyn:
                grouped_hits += 1
        for g in per.values():
            for i, a in enumerate(g):
                for b in g[i + 1:]:
                    pred_pairs.add((w, a, b))
        for g in tw.groups:
            for i, a in enumerate(g):
                for b in g[i + 1:]:
                    true_pairs.add((w, a, b))

    for w, per in detected.items():
        if w not in truth.windows:
            raise ValueError("detected events outside the ground-truth window range")

    return EvaluationReport(
        detection_rate=(hits / truth_moving) if truth_moving else None,
        grouping_accuracy=(grouped_hits / grouped_total) if grouped_total else None,
        pair_precision=(len(pred_pairs & true_pairs) / len(pred_pairs)) if pred_pairs else None,
        pair_recall=(len(pred_pairs & true_pairs) / len(true_pairs)) if true_pairs else None,
        truth_moving=truth_moving,
        detected_dynamic=grouped_total,
    )


def write_ground_truth(truth: GroundTruth, stream: IO) -> None:
    header = {"window_len": truth.window_len, "origin": truth.origin}
    stream.write(json.dumps({"meta": header}) + "\n")
    for w in sorted(truth.windows):
        tw = truth.windows[w]
        stream.write(
            json.dumps(
                {"window": w, "moving": sorted(tw.moving), "groups": [list(g) for g in tw.groups]}
            )
            + "\n"
        )


def read_ground_truth(stream) -> GroundTruth:
    lines = [line for line in (l.strip() for l in stream) if line]
    meta = json.loads(lines[0])["meta"]
    truth = GroundTruth(float(meta["window_len"]), float(meta["origin"]))
    for line in lines[1:]:
        obj = json.loads(line)
        truth.windows[int(obj["window"])] = TruthWindow(
            frozenset(obj["moving"]), tuple(tuple(g) for g in obj["groups"])
        )
    return truth


# --------------------------------------------------------------------------
# Presets


def _walk_cycle(a: tuple[float, float], b: tuple[float, float]) -> tuple[tuple[float, float, float], ...]:
    """Desk-scale back-and-forth between two dwell points: 10 s and 20 s
    walks plus one 5 s run, transitions straddling the 20 s window grid so
    each window is dominated by one side."""
    ax, ay = a
    bx, by = b
    return (
        (0.0, ax, ay),
        (15.0, ax, ay),
        (25.0, bx, by),      # 10 s walk
        (52.0, bx, by),
        (72.0, ax, ay),      # 20 s walk
        (98.0, ax, ay),
        (103.0, bx, by),     # 5 s run
        (112.0, bx, by),
        (132.0, ax, ay),     # 20 s walk
        (150.0, ax, ay),
    )


def preset_controlled_10_beacons(seed: int = 0) -> ScenarioConfig:
    """10 co-carried beacons shuttling between 2 sniffers 10 m apart, 2.5 min."""
    trajectory = _walk_cycle((3.9, 3.0), (6.1, 3.0))
    devices = tuple(
        DeviceScript(f"B{i:02d}", trajectory, group_labels=((0.0, 150.0, "box"),))
        for i in range(1, 11)
    )
    return ScenarioConfig(
        sniffers=(("S1", 0.0, 0.0), ("S2", 10.0, 0.0)),
        devices=devices,
        duration=150.0,
        seed=seed,
    )


def preset_office_2_rooms(seed: int = 0) -> ScenarioConfig:
    """Two office rooms on a 3-sniffer corridor, 10 min.

    p1 carries two beacons at once (p1 and p1b, both with independent 0.7
    per-packet delivery) as the duplicate-beacon reliability check; p2
    shares one walk with p1, p3/p4 always walk together, p5 walks alone.
    """
    room_a = (-2.5, 3.0)
    room_b = (22.5, 3.0)

    def seg(*points: tuple[float, float, float]) -> tuple[tuple[float, float, float], ...]:
        return points

    p1_traj = seg(
        (0.0, *room_a),
        (100.0, *room_a), (140.0, *room_b),
        (260.0, *room_b), (300.0, *room_a),
        (440.0, *room_a), (480.0, *room_b),
        (540.0, *room_b), (580.0, *room_a),
        (600.0, *room_a),
    )
    p2_traj = seg(
        (0.0, *room_a),
        (200.0, *room_a), (240.0, *room_b),
        (330.0, *room_b), (370.0, *room_a),
        (440.0, *room_a), (480.0, *room_b),
        (600.0, *room_b),
    )
    p3_traj = seg(
        (0.0, *room_b),
        (160.0, *room_b), (200.0, *room_a),
        (280.0, *room_a), (320.0, *room_b),
        (500.0, *room_b), (540.0, *room_a),
        (600.0, *room_a),
    )
    p5_traj = seg(
        (0.0, *room_b),
        (60.0, *room_b), (100.0, *room_a),
        (150.0, *room_a), (190.0, *room_b),
        (400.0, *room_b), (440.0, *room_a),
        (600.0, *room_a),
    )
    devices = (
        DeviceScript("p1", p1_traj, group_labels=((0.0, 600.0, "g1"),), delivery_prob=0.7),
        DeviceScript("p1b", p1_traj, group_labels=((0.0, 600.0, "g1"),), delivery_prob=0.7),
        DeviceScript("p2", p2_traj, group_labels=((430.0, 490.0, "g1"),)),
        DeviceScript("p3", p3_traj, group_labels=((0.0, 600.0, "g34"),)),
        DeviceScript("p4", p3_traj, group_labels=((0.0, 600.0, "g34"),)),
        DeviceScript("p5", p5_traj),
    )
    return ScenarioConfig(
        sniffers=(("S1", 0.0, 0.0), ("S2", 10.5, 0.0), ("S3", 20.0, 0.0)),
        devices=devices,
        duration=600.0,
        seed=seed,
    )


def preset_two_groups_crossing(seed: int = 0) -> ScenarioConfig:
    """Two 2-person groups walking opposite directions along a 3-sniffer line."""
    east = ((0.0, 1.0, 0.0), (10.0, 1.0, 0.0), (130.0, 29.0, 0.0), (150.0, 29.0, 0.0))
    west = ((0.0, 29.0, 0.0), (10.0, 29.0, 0.0), (130.0, 1.0, 0.0), (150.0, 1.0, 0.0))
    devices = (
        DeviceScript("x1", east, group_labels=((0.0, 150.0, "gx"),)),
        DeviceScript("x2", east, group_labels=((0.0, 150.0, "gx"),)),
        DeviceScript("y1", west, group_labels=((0.0, 150.0, "gy"),)),
        DeviceScript("y2", west, group_labels=((0.0, 150.0, "gy"),)),
    )
    return ScenarioConfig(
        sniffers=(("S1", 0.0, 0.0), ("S2", 15.0, 0.0), ("S3", 30.0, 0.0)),
        devices=devices,
        duration=150.0,
        seed=seed,
    )


def preset(name: str, seed: int = 0) -> ScenarioConfig:
    if name == "controlled-10-beacons":
        return preset_controlled_10_beacons(seed)
    if name == "office-2-rooms":
        return preset_office_2_rooms(seed)
    if name == "two-groups-crossing":
        return preset_two_groups_crossing(seed)
    raise ValueError(f"unknown preset: {name!r} (have {', '.join(PRESET_NAMES)})")


def with_seed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    return replace(cfg, seed=seed)
