import io
import random

import pytest

from fingertrace.ingest import PacketRecord
from fingertrace.windowing import WindowSpec, WindowedRssi, CellStats, aggregate
from fingertrace.fingerprint import (
    Fingerprint,
    build_fingerprints,
    prefix,
    read_fingerprints,
    write_fingerprints,
)


def windowed_from(cells):
    out = WindowedRssi(WindowSpec(20.0, 0.0))
    for (device, window), inner in cells.items():
        out.cells[(device, window)] = {s: CellStats(m, 1) for s, m in inner.items()}
    return out


def test_two_element_sort():
    fps = build_fingerprints(windowed_from({("B1", 0): {"S1": -50.0, "S2": -70.0}}))
    assert fps["B1"].entries[0].sniffers == ("S1", "S2")


def test_tie_breaks_by_ascending_sniffer_id():
    fps = build_fingerprints(windowed_from({("B1", 0): {"S2": -60.0, "S1": -60.0}}))
    assert fps["B1"].entries[0].sniffers == ("S1", "S2")


def test_fingerprint_invariants():
    with pytest.raises(ValueError):
        Fingerprint(0, ())
    with pytest.raises(ValueError):
        Fingerprint(0, ("S1", "S1"))


def test_every_nonempty_cell_yields_a_fingerprint():
    cells = {("B1", 0): {"S1": -50.0}, ("B1", 3): {"S2": -60.0}, ("B2", 1): {"S1": -40.0}}
    fps = build_fingerprints(windowed_from(cells))
    assert fps["B1"].windows() == [0, 3]
    assert fps["B2"].windows() == [1]


def test_invariance_under_affine_rescaling():
    # sorting depends only on RSSI order, not magnitude
    base = {("B1", 0): {"S1": -45.0, "S2": -61.0, "S3": -52.0}}
    scaled = {("B1", 0): {s: 0.5 * v - 3 for s, v in base[("B1", 0)].items()}}
    a = build_fingerprints(windowed_from(base))
    b = build_fingerprints(windowed_from(scaled))
    assert a["B1"].entries[0].sniffers == b["B1"].entries[0].sniffers


def test_prefix_basic_and_truncation():
    fp = Fingerprint(0, ("S2", "S1", "S3"))
    assert prefix(fp, 1) == ("S2",)
    assert prefix(fp, 3) == ("S2", "S1", "S3")
    assert prefix(Fingerprint(0, ("S2",)), 2) == ("S2",)


def test_prefix_rejects_k_zero():
    with pytest.raises(ValueError):
        prefix(Fingerprint(0, ("S1",)), 0)


def test_prefix_nesting_property():
    random.seed(11)
    sniffers = [f"S{i}" for i in range(6)]
    for _ in range(50):
        n = random.randint(1, 6)
        fp = Fingerprint(0, tuple(random.sample(sniffers, n)))
        for k in range(1, 7):
            assert prefix(fp, k) == prefix(fp, k + 1)[:k]


def test_jsonl_round_trip():
    cells = {("B1", 0): {"S1": -50.0, "S2": -70.0}, ("B2", 2): {"S2": -40.0}}
    fps = build_fingerprints(windowed_from(cells))
    buf = io.StringIO()
    write_fingerprints(fps, buf)
    buf.seek(0)
    back = read_fingerprints(buf)
    assert {d: s.entries for d, s in back.items()} == {d: s.entries for d, s in fps.items()}


def test_fingerprints_from_aggregated_packets():
    records = [
        PacketRecord(1.0, "S1", "B1", -50),
        PacketRecord(2.0, "S1", "B1", -54),
        PacketRecord(1.5, "S2", "B1", -60),
    ]
    fps = build_fingerprints(aggregate(records, WindowSpec(5.0, 0.0)))
    assert fps["B1"].entries[0].sniffers == ("S1", "S2")
