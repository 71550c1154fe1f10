import pytest

from fingertrace.metrics import MatrixEntry
from fingertrace.socialgraph import SocialGraph, build_graph, export_graph, load_graph_json


def entries(pairs, metric="mi"):
    return [MatrixEntry(a, b, metric, v) for (a, b), v in pairs.items()]


def test_edge_weight_is_directional_mean():
    graph = build_graph(entries({("i", "j"): 0.3, ("j", "i"): 0.5}))
    assert graph.weight("i", "j") == pytest.approx(0.4)


def test_below_threshold_pair_is_omitted():
    graph = build_graph(entries({("i", "j"): 0.05, ("j", "i"): 0.05}), threshold=0.1)
    assert graph.edges == {}
    assert set(graph.nodes) == {"i", "j"}  # isolated nodes retained


def test_equality_with_threshold_keeps_edge():
    graph = build_graph(entries({("i", "j"): 0.1, ("j", "i"): 0.1}), threshold=0.1)
    assert graph.weight("i", "j") == pytest.approx(0.1)


def test_all_no_data_yields_nodes_only():
    graph = build_graph(entries({("i", "j"): None, ("j", "i"): None}))
    assert graph.edges == {}
    assert set(graph.nodes) == {"i", "j"}


def test_one_sided_no_data_uses_defined_side():
    graph = build_graph(entries({("i", "j"): 0.4, ("j", "i"): None}))
    assert graph.weight("i", "j") == pytest.approx(0.4)


def test_threshold_out_of_range_is_config_error():
    with pytest.raises(ValueError):
        build_graph([], threshold=1.1)
    with pytest.raises(ValueError):
        build_graph([], threshold=-0.1)


def test_monotone_in_threshold():
    values = {("a", "b"): 0.3, ("b", "a"): 0.3, ("a", "c"): 0.15, ("c", "a"): 0.15, ("b", "c"): 0.05, ("c", "b"): 0.05}
    loose = build_graph(entries(values), threshold=0.1)
    tight = build_graph(entries(values), threshold=0.2)
    assert set(tight.edges) <= set(loose.edges)


def test_symmetrized_weights_are_symmetric():
    graph = build_graph(entries({("i", "j"): 0.2, ("j", "i"): 0.6}))
    assert graph.weight("i", "j") == graph.weight("j", "i")


def test_dot_export_has_edge_and_label():
    graph = build_graph(entries({("a", "b"): 0.4, ("b", "a"): 0.4}))
    dot = export_graph(graph, "dot").decode()
    assert '"a" -- "b"' in dot
    assert 'label="0.4000"' in dot


def test_exports_are_deterministic():
    values = {("a", "b"): 0.4, ("b", "a"): 0.2, ("a", "c"): 0.9, ("c", "a"): 0.7}
    for fmt in ("dot", "graphml", "json"):
        one = export_graph(build_graph(entries(values)), fmt)
        two = export_graph(build_graph(entries(values)), fmt)
        assert one == two


def test_graphml_room_groups():
    people = [f"P{i}" for i in range(10)]
    rooms = {p: f"room{i % 5}" for i, p in enumerate(people)}
    values = {}
    for i in range(0, 10, 2):
        values[(people[i], people[i + 1])] = 0.5
        values[(people[i + 1], people[i])] = 0.5
    graph = build_graph(entries(values), rooms=rooms)
    xml = export_graph(graph, "graphml").decode()
    for r in range(5):
        assert f'<data key="room">room{r}</data>' in xml
    assert xml.count("<node ") == 10


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        export_graph(SocialGraph(), "svg")


def test_json_round_trip_preserves_graph():
    rooms = {"a": "r1", "b": "r2"}
    graph = build_graph(entries({("a", "b"): 0.25, ("b", "a"): 0.35}), rooms=rooms)
    back = load_graph_json(export_graph(graph, "json"))
    assert back.nodes == graph.nodes
    assert back.edges == graph.edges
    assert back.metric == graph.metric


def test_mixed_metric_matrix_rejected():
    rows = [MatrixEntry("a", "b", "mi", 0.5), MatrixEntry("b", "a", "tmi", 0.5)]
    with pytest.raises(ValueError):
        build_graph(rows)
