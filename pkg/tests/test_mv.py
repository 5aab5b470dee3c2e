import networkx as nx
import pytest

from oracles import brute_force_shortest_path
from syngrid.geodata import RoadSegment
from syngrid.geometry import GeoPoint, dist, polyline_length
from syngrid.mv import (MvSynthesisError, attach_hv_feeder, build_mv,
                        translate_network)


def road(rid, *pts):
    poly = tuple(GeoPoint(*p) for p in pts)
    return RoadSegment(rid, poly, polyline_length(poly))


def total_length(roads):
    return sum(r.length_m for r in roads)


def test_translate_identity():
    roads = [road("a", (0, 0), (10, 5), (20, 0))]
    assert translate_network(roads, (0.0, 0.0)) == roads


def test_translate_shifts_and_conserves_length():
    roads = [road("a", (0, 0), (10, 5), (20, 0)), road("b", (5, 5), (9, 8))]
    out = translate_network(roads, (10.0, 10.0))
    for before, after in zip(roads, out):
        for p, q in zip(before.polyline, after.polyline):
            assert (q.x - p.x, q.y - p.y) == (10.0, 10.0)
    assert total_length(out) == pytest.approx(total_length(roads), rel=1e-9)


def test_translate_round_trip():
    roads = [road("a", (0.5, 1.25), (10.75, 5.5))]
    back = translate_network(translate_network(roads, (25.0, 25.0)),
                             (-25.0, -25.0))
    for p, q in zip(roads[0].polyline, back[0].polyline):
        assert dist(p, q) < 1e-9


def test_single_transformer_stub_path_to_root():
    roads = [road("a", (0, 0), (200, 0)), road("b", (100, 0), (100, 150))]
    syn = build_mv({"0": GeoPoint(50.0, 30.0)}, roads)
    assert nx.is_tree(syn.tree)
    tap = syn.transformer_nodes["0"]
    assert tap == (50.0, 30.0)
    # the tree is exactly the path from the tap to the root
    path = nx.shortest_path(syn.tree, tap, syn.root)
    assert syn.tree.number_of_edges() == len(path) - 1
    assert syn.root == (100.0, 0.0)  # the road crossing, degree 4


def test_three_transformers_y_network_matches_oracle():
    roads = [road("w", (-200, 0), (0, 0)), road("e", (0, 0), (200, 0)),
             road("n", (0, 0), (0, 200))]
    taps = {"0": GeoPoint(-180.0, 40.0), "1": GeoPoint(180.0, 40.0),
            "2": GeoPoint(30.0, 180.0)}
    syn = build_mv(taps, roads)
    assert nx.is_tree(syn.tree)
    assert syn.root == (0.0, 0.0)
    # oracle: enumerate simple paths on an independently tapped road graph
    from syngrid.spatial import attach_point, build_spatial_graph
    sg = build_spatial_graph(roads)
    for k, pt in sorted(taps.items()):
        attach_point(sg, pt, k)
    edges = [(u, v, d["length"]) for u, v, d in sg.graph.edges(data=True)]
    for key, node in syn.transformer_nodes.items():
        in_tree = nx.shortest_path_length(syn.tree, node, syn.root,
                                          weight="length")
        assert in_tree == pytest.approx(
            brute_force_shortest_path(edges, node, syn.root), abs=1e-9)


def test_every_transformer_connected_or_error():
    roads = [road("a", (0, 0), (100, 0), (200, 0), (200, 100)),
             road("b", (0, 50), (100, 50)),
             road("far", (5000, 5000), (5050, 5000))]
    taps = {"0": GeoPoint(50.0, 10.0), "1": GeoPoint(5025.0, 5010.0)}
    with pytest.raises(MvSynthesisError) as err:
        build_mv(taps, roads)
    assert err.value.orphaned == ["1"]


def test_no_roads_at_all():
    with pytest.raises(MvSynthesisError):
        build_mv({"0": GeoPoint(0.0, 0.0)}, [])


def test_hv_feeder_colocated_with_mv_root():
    roads = [road("a", (0, 0), (200, 0)), road("b", (100, 0), (100, 150))]
    syn = build_mv({"0": GeoPoint(10.0, 10.0)}, roads)
    site = attach_hv_feeder(syn)
    assert (site.x, site.y) == syn.root


def test_isometry_property_many_offsets():
    roads = [road("a", (0, 0), (13.7, 21.9), (44.1, 44.1)),
             road("b", (-5, 3), (8, -2))]
    for offset in [(25.0, 25.0), (-13.0, 7.5), (1e-3, -1e-3), (1000.0, 0.0)]:
        out = translate_network(roads, offset)
        assert total_length(out) == pytest.approx(total_length(roads), rel=1e-9)
