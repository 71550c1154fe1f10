import io
import random

import pytest

from fingertrace.fingerprint import Fingerprint, FingerprintSeries
from fingertrace.movement import (
    GroupEvent,
    MovementLedger,
    Status,
    correlated,
    detect_groups,
    movement_runs,
    read_group_events,
    reference_window,
    status,
    write_group_events,
    write_ledger,
)

# the co-walked trace fixture: 8 windows of alternating nearest sniffers
WF_B1 = ["S1S2", "S1S2", "S2S1", "S1S2", "S2S1", "S2S1", "S1S2", "S2S1"]


def series(device, fps, start=0):
    s = FingerprintSeries(device)
    for i, sniffers in enumerate(fps):
        if sniffers is None:
            continue
        w = start + i
        if isinstance(sniffers, str):
            sniffers = tuple(sniffers[j:j + 2] for j in range(0, len(sniffers), 2))
        s.entries[w] = Fingerprint(w, tuple(sniffers))
    return s


def test_static_when_top_sniffer_unchanged():
    s = series("B1", [("S1", "S3"), ("S1", "S2")])
    assert status(s, 1, k=1) is Status.STATIC


def test_dynamic_at_third_window_of_cowalked_fixture():
    s = series("B1", WF_B1)
    assert status(s, 2, k=1) is Status.DYNAMIC


def test_unknown_without_reference_in_gap():
    s = series("B1", [("S1",), None, None, None, None, ("S1",)])
    assert status(s, 5, k=1, gap_max=3) is Status.UNKNOWN
    assert status(s, 5, k=1, gap_max=5) is Status.STATIC


def test_unknown_when_fingerprint_missing():
    s = series("B1", [("S1",)])
    assert status(s, 7) is Status.UNKNOWN


def test_first_window_is_unknown():
    s = series("B1", [("S1",)])
    assert status(s, 0) is Status.UNKNOWN


def test_reference_window_is_nearest_within_gap():
    s = series("B1", [("S1",), None, ("S2",), None, ("S1",)])
    assert reference_window(s, 4, gap_max=3) == 2
    assert reference_window(s, 4, gap_max=1) is None


def test_status_invariant_under_monotone_rssi_transform():
    # status only sees fingerprint order, a transform that preserves RSSI
    # ranks leaves every fingerprint, hence every status, unchanged
    s = series("B1", WF_B1)
    for w in range(1, 8):
        assert status(s, w) in (Status.STATIC, Status.DYNAMIC)


def test_correlated_true_when_prefixes_agree_now_and_before():
    a = series("A", [("S1", "S2"), ("S2", "S1")])
    b = series("B", [("S1", "S3"), ("S2", "S3")])
    assert correlated(a, b, 1, k=1)


def test_correlated_false_on_reference_disagreement():
    a = series("A", [("S1",), ("S2",)])
    b = series("B", [("S3",), ("S2",)])
    assert not correlated(a, b, 1, k=1)


def test_correlated_false_on_missing_fingerprints():
    a = series("A", [("S1",), ("S2",)])
    b = series("B", [("S1",), None])
    assert not correlated(a, b, 1, k=1)


def test_groups_form_connected_components():
    # (A,B) and (B,C) correlated at k=2; (A,C) differ at second position but
    # join the same group through B
    a = series("A", [("S1", "S2", "S3"), ("S2", "S1", "S3")])
    b = series("B", [("S1", "S2"), ("S2", "S1")])
    c = series("C", [("S1", "S2", "S4"), ("S2", "S1", "S4")])
    events, ledger = detect_groups({"A": a, "B": b, "C": c}, k=2)
    assert events == [GroupEvent(1, (("A", "B", "C"),))]
    assert not correlated(a, c, 1, k=3)


def test_single_dynamic_person_forms_singleton_group():
    a = series("A", [("S1",), ("S2",)])
    b = series("B", [("S1",), ("S1",)])
    events, ledger = detect_groups({"A": a, "B": b})
    assert events == [GroupEvent(1, (("A",),))]
    assert ledger.moving == {"A": {1}}
    assert ledger.together == {}


def test_static_and_unknown_people_never_join_groups():
    a = series("A", [("S1",), ("S2",)])
    b = series("B", [("S1",), ("S2",)])
    c = series("C", [None, ("S2",)])  # unknown: no reference
    events, _ = detect_groups({"A": a, "B": b, "C": c})
    assert events == [GroupEvent(1, (("A", "B"),))]


def test_partition_is_valid():
    random.seed(21)
    sniffers = ["S1", "S2", "S3"]
    people = {}
    for p in "ABCDEF":
        fps = []
        for w in range(15):
            if random.random() < 0.2:
                fps.append(None)
            else:
                n = random.randint(1, 3)
                fps.append(tuple(random.sample(sniffers, n)))
        people[p] = series(p, fps)
    events, ledger = detect_groups(people)
    for ev in events:
        flat = [p for g in ev.groups for p in g]
        assert len(flat) == len(set(flat))
        for p in flat:
            assert status(people[p], ev.window) is Status.DYNAMIC
    for p, tm in ledger.together.items():
        assert tm <= ledger.moving[p]


def test_single_sniffer_deployment_everyone_static():
    people = {p: series(p, [("S1",)] * 10) for p in "AB"}
    events, ledger = detect_groups(people)
    assert events == []
    assert ledger.moving == {}


def test_detect_groups_requires_input():
    with pytest.raises(ValueError):
        detect_groups({})


def test_movement_runs_merge_and_flat():
    ledger = MovementLedger()
    for w in (3, 4, 5, 9):
        ledger.record("A", w, 1)
    merged = movement_runs(ledger, merge=True)
    assert merged["A"] == [(3, 5), (9, 9)]
    flat = movement_runs(ledger, merge=False)
    assert flat["A"] == [(3, 3), (4, 4), (5, 5), (9, 9)]


def test_movement_runs_empty_ledger():
    assert movement_runs(MovementLedger(), merge=True) == {}


def test_group_events_round_trip():
    events = [GroupEvent(2, (("A", "B"), ("C",)))]
    buf = io.StringIO()
    write_group_events(events, buf)
    buf.seek(0)
    assert read_group_events(buf) == events


def test_ledger_csv_export():
    a = series("A", [("S1",), ("S2",)])
    b = series("B", [("S1",), ("S2",)])
    events, ledger = detect_groups({"A": a, "B": b})
    buf = io.StringIO()
    write_ledger(ledger, events, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "device,window,in_group_size"
    assert "A,1,2" in lines and "B,1,2" in lines
