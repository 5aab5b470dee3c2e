"""Spatial road graph: topology nodes at endpoints, crossings and taps.

Roads become weighted undirected edges carrying their polyline geometry.
Crossing roads are split at their intersection so every crossing is a
shared node; buildings and transformer stations tap the graph through
:func:`attach_point`, which splits the nearest edge at the foot point.

Node keys are coordinates snapped to a 1e-6 m grid; each node also gets an
insertion-order index used for deterministic tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

from .geodata import RoadSegment
from .geometry import (GeoPoint, dist, nearest_point_on_polyline,
                       polyline_length, segment_intersection)

SNAP_DECIMALS = 6  # 1e-6 m snapping grid
SNAP_TOL = 10.0 ** -SNAP_DECIMALS

NodeKey = tuple[float, float]


def snap(p) -> NodeKey:
    return (round(p[0], SNAP_DECIMALS), round(p[1], SNAP_DECIMALS))


@dataclass
class SpatialGraph:
    graph: nx.Graph = field(default_factory=nx.Graph)
    _order: int = 0

    def add_node(self, p) -> NodeKey:
        key = snap(p)
        if key not in self.graph:
            self.graph.add_node(key, order=self._order)
            self._order += 1
        return key

    def add_edge(self, a, b, geometry, road_id: str, kind: str = "road") -> None:
        ka, kb = self.add_node(a), self.add_node(b)
        if ka == kb:
            return  # zero-length after snapping
        length = polyline_length(geometry)
        if length <= 0.0:
            return
        # parallel duplicates keep the first (lower road id in input order)
        if not self.graph.has_edge(ka, kb):
            self.graph.add_edge(ka, kb, length=length,
                                geometry=tuple(GeoPoint(*p) for p in geometry),
                                road_id=road_id, kind=kind)

    def node_order(self, key: NodeKey) -> int:
        return self.graph.nodes[key]["order"]


def _cut_polyline(points, cuts: list[float]) -> list[tuple[list, float]]:
    """Split a polyline at arc-length positions; returns (sub-polyline, s0) parts."""
    cum = [0.0]
    for i in range(len(points) - 1):
        cum.append(cum[-1] + dist(points[i], points[i + 1]))
    total = cum[-1]
    stations = [0.0]
    for c in sorted(cuts):
        if c - stations[-1] > SNAP_TOL and total - c > SNAP_TOL:
            stations.append(c)
    stations.append(total)

    parts = []
    seg = 0
    for si in range(len(stations) - 1):
        s0, s1 = stations[si], stations[si + 1]
        sub = [_interpolate(points, cum, s0)]
        while seg < len(points) - 1 and cum[seg + 1] <= s1 + SNAP_TOL:
            if cum[seg + 1] > s0 + SNAP_TOL and s1 - cum[seg + 1] > SNAP_TOL:
                sub.append(points[seg + 1])
            seg += 1
        sub.append(_interpolate(points, cum, s1))
        parts.append((sub, s0))
    return parts


def _interpolate(points, cum, s: float):
    if s <= 0.0:
        return points[0]
    if s >= cum[-1]:
        return points[-1]
    for i in range(len(points) - 1):
        if cum[i + 1] >= s:
            seg_len = cum[i + 1] - cum[i]
            t = (s - cum[i]) / seg_len if seg_len > 0 else 0.0
            a, b = points[i], points[i + 1]
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    return points[-1]


def build_spatial_graph(roads: list[RoadSegment]) -> SpatialGraph:
    """Graph over road polylines with crossings split into shared nodes."""
    # flat list of (road index, segment index, a, b, arc offset) for crossing tests
    segments = []
    arc = []
    for ri, road in enumerate(roads):
        offsets = [0.0]
        for i in range(len(road.polyline) - 1):
            a, b = road.polyline[i], road.polyline[i + 1]
            segments.append((ri, i, a, b))
            offsets.append(offsets[-1] + dist(a, b))
        arc.append(offsets)

    cuts: dict[int, list[float]] = {ri: [] for ri in range(len(roads))}
    boxes = []
    for ri, i, a, b in segments:
        boxes.append((min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1])))
    for si in range(len(segments)):
        ri, i, a, b = segments[si]
        bx = boxes[si]
        for sj in range(si + 1, len(segments)):
            rj, j, c, d = segments[sj]
            if rj == ri:
                continue  # same road: vertices already chain the segments
            by = boxes[sj]
            if (bx[2] < by[0] - SNAP_TOL or by[2] < bx[0] - SNAP_TOL
                    or bx[3] < by[1] - SNAP_TOL or by[3] < bx[1] - SNAP_TOL):
                continue
            hit = segment_intersection(a, b, c, d, tol=SNAP_TOL)
            if hit is None:
                continue
            cuts[ri].append(arc[ri][i] + dist(a, hit))
            cuts[rj].append(arc[rj][j] + dist(c, hit))

    sg = SpatialGraph()
    for ri, road in enumerate(roads):
        for sub, _ in _cut_polyline(list(road.polyline), cuts[ri]):
            sg.add_edge(sub[0], sub[-1], sub, road.id)
    return sg


def attach_point(sg: SpatialGraph, point, point_id: str) -> NodeKey:
    """Connect ``point`` to the graph via a stub to the nearest road point.

    The nearest edge is split at the foot point (ties keep the edge added
    first, i.e. the lower road id). A point lying on a road attaches
    directly to the inserted node instead of getting a zero-length stub.
    Returns the node key that carries the point.
    """
    best = None  # (distance, edge index, u, v, foot)
    for ei, (u, v, data) in enumerate(sg.graph.edges(data=True)):
        if data["kind"] != "road":
            continue
        foot, _, _, d = nearest_point_on_polyline(point, data["geometry"])
        if best is None or d < best[0]:
            best = (d, ei, u, v, foot)
    if best is None:
        raise ValueError(f"no road edges to attach point {point_id}")

    d, _, u, v, foot = best
    if dist(foot, u) <= SNAP_TOL or dist(foot, v) <= SNAP_TOL:
        foot_key = u if dist(foot, u) <= dist(foot, v) else v
        foot = foot_key
    else:
        foot_key = _split_edge(sg, u, v, foot)

    point_key = snap(point)
    if point_key == foot_key or dist(point, foot) <= SNAP_TOL:
        return foot_key
    sg.add_edge(point, foot_key, [tuple(point), foot_key], road_id=point_id,
                kind="service")
    return point_key


def _split_edge(sg: SpatialGraph, u, v, at) -> NodeKey:
    """Split edge u-v at interior point ``at``; returns the new node key."""
    data = sg.graph.edges[u, v]
    geometry = list(data["geometry"])
    foot, si, _, _ = nearest_point_on_polyline(at, geometry)
    if dist(foot, geometry[si]) <= SNAP_TOL and si > 0:
        first, second = geometry[:si + 1], geometry[si:]
        foot = geometry[si]
    elif dist(foot, geometry[si + 1]) <= SNAP_TOL and si + 1 < len(geometry) - 1:
        first, second = geometry[:si + 2], geometry[si + 1:]
        foot = geometry[si + 1]
    else:
        first = geometry[:si + 1] + [foot]
        second = [foot] + geometry[si + 1:]
    sg.graph.remove_edge(u, v)
    sg.add_edge(first[0], first[-1], first, data["road_id"], data["kind"])
    sg.add_edge(second[0], second[-1], second, data["road_id"], data["kind"])
    return snap(foot)


def largest_component(sg: SpatialGraph) -> set[NodeKey]:
    """Largest connected component: most nodes, then largest total length."""
    if sg.graph.number_of_nodes() == 0:
        return set()
    comps = list(nx.connected_components(sg.graph))

    def rank(comp):
        length = sum(d["length"] for _, _, d in sg.graph.edges(comp, data=True))
        min_order = min(sg.node_order(n) for n in comp)
        return (-len(comp), -length, min_order)

    return set(min(comps, key=rank))


def choose_root(sg: SpatialGraph, component: set[NodeKey]) -> NodeKey:
    """Highest-degree node; ties go to the node nearest the component
    centroid, then to the earliest-inserted node."""
    cx = sum(n[0] for n in component) / len(component)
    cy = sum(n[1] for n in component) / len(component)
    return min(component, key=lambda n: (-sg.graph.degree(n),
                                         math.hypot(n[0] - cx, n[1] - cy),
                                         sg.node_order(n)))


def shortest_path_tree(sg: SpatialGraph, root: NodeKey,
                       targets: list[NodeKey]) -> nx.Graph:
    """Union of length-weighted shortest paths from each target to the root.

    Single-source paths share predecessors, so the union is a tree that
    preserves every target's shortest distance to the root.
    """
    lengths, paths = nx.single_source_dijkstra(sg.graph, root, weight="length")
    missing = [t for t in targets if t not in paths]
    if missing:
        raise ValueError(f"targets not reachable from root: {missing[:3]}")
    tree = nx.Graph()
    tree.add_node(root, **sg.graph.nodes[root])
    for t in targets:
        path = paths[t]
        for a, b in zip(path, path[1:]):
            if not tree.has_edge(a, b):
                tree.add_node(a, **sg.graph.nodes[a])
                tree.add_node(b, **sg.graph.nodes[b])
                tree.add_edge(a, b, **sg.graph.edges[a, b])
    return tree
