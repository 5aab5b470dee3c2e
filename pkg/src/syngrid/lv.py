"""Per-polytope LV grid synthesis: snap buildings, prune to a radial tree.

Each polytope with buildings yields one LV grid: buildings tap the road
graph, the densest connected component is kept, and the grid is the union
of shortest paths from every building to the root node, where the
MV/LV transformer will sit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import networkx as nx

from .geodata import Building, GeoDataset
from .geometry import GeoPoint
from .model import Load
from .spatial import (NodeKey, SpatialGraph, attach_point, build_spatial_graph,
                      choose_root, largest_component, shortest_path_tree)

import numpy as np


class SkipPolytope(Exception):
    """Polytope cannot host an LV grid (no roads, or no served buildings)."""


def allocate_consumers(building: Building, m2_per_customer: float) -> int:
    """One consumer per started ``m2_per_customer`` of floor area, minimum 1."""
    if m2_per_customer <= 0:
        raise ValueError("m2_per_customer must be positive")
    return max(1, math.floor(building.area_m2 / m2_per_customer))


def snap_buildings(dataset: GeoDataset) -> tuple[SpatialGraph, dict[str, NodeKey]]:
    """Road graph with a stub edge from every building centroid.

    The stub foot becomes a graph node, splitting the road there. Returns
    the graph and the building-id to node-key map.
    """
    if not dataset.roads:
        raise SkipPolytope("no roads in polytope")
    if not dataset.buildings:
        raise SkipPolytope("no buildings in polytope")
    sg = build_spatial_graph(list(dataset.roads))
    building_nodes = {}
    for b in dataset.buildings:
        building_nodes[b.id] = attach_point(sg, b.centroid, b.id)
    return sg, building_nodes


def build_radial(sg: SpatialGraph, building_nodes: dict[str, NodeKey],
                 root: NodeKey | None = None) -> tuple[nx.Graph, NodeKey, list[str]]:
    """Radial LV tree over the largest component.

    Returns (tree, root, dropped building ids). Buildings outside the
    kept component are dropped; if none remain the polytope is skipped.
    """
    component = largest_component(sg)
    served = {bid: key for bid, key in building_nodes.items() if key in component}
    dropped = sorted(set(building_nodes) - set(served))
    if not served:
        raise SkipPolytope("largest road component contains no buildings")
    if root is None:
        root = choose_root(sg, component)
    targets = [served[bid] for bid in sorted(served)]
    tree = shortest_path_tree(sg, root, targets)
    return tree, root, dropped


@dataclass
class LvSynthesis:
    """One polytope's LV grid before electrical sizing."""
    polytope_index: int
    tree: nx.Graph
    root: NodeKey
    building_nodes: dict[str, NodeKey]
    consumers: dict[str, int]            # building id -> consumer count
    dropped_buildings: list[str] = field(default_factory=list)

    @property
    def total_consumers(self) -> int:
        return sum(self.consumers.values())

    def node_consumers(self) -> dict[NodeKey, int]:
        out: dict[NodeKey, int] = {}
        for bid, key in self.building_nodes.items():
            out[key] = out.get(key, 0) + self.consumers[bid]
        return out


def synthesize(polytope_index: int, dataset: GeoDataset,
               m2_per_customer: float) -> LvSynthesis:
    """Full LV synthesis for one cropped polytope dataset."""
    sg, building_nodes = snap_buildings(dataset)
    tree, root, dropped = build_radial(sg, building_nodes)
    served = {bid: key for bid, key in building_nodes.items() if bid not in set(dropped)}
    by_id = {b.id: b for b in dataset.buildings}
    consumers = {bid: allocate_consumers(by_id[bid], m2_per_customer)
                 for bid in sorted(served)}
    return LvSynthesis(polytope_index, tree, root, served, consumers, dropped)


def attach_transformer(synthesis: LvSynthesis) -> GeoPoint:
    """MV-side connection point of the grid's transformer: the root location.

    The transformer itself is created during sizing; this pins the bus
    placement rule (MV bus co-located with the LV root).
    """
    return GeoPoint(*synthesis.root)


def tree_to_geojson(synthesis: LvSynthesis) -> str:
    """Debug dump of one polytope's LV tree as a GeoJSON FeatureCollection."""
    import json

    features = []
    for u, v, data in synthesis.tree.edges(data=True):
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [[p[0], p[1]] for p in data["geometry"]]},
            "properties": {"kind": data["kind"], "length_m": data["length"],
                           "road_id": data["road_id"]},
        })
    features.append({
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": list(synthesis.root)},
        "properties": {"kind": "root", "polytope": synthesis.polytope_index},
    })
    return json.dumps({"type": "FeatureCollection", "features": features})


def assign_pv(loads: list[Load], penetration: float, seed: int) -> list[Load]:
    """Flag exactly ``round(penetration * len(loads))`` loads with PV.

    Selection is a seeded uniform shuffle; flagged loads generate half
    their active demand. Order of the returned list matches the input.
    """
    if not 0.0 <= penetration <= 1.0:
        raise ValueError(f"penetration must be within [0, 1], got {penetration}")
    k = round(penetration * len(loads))
    rng = np.random.default_rng(seed)
    chosen = set(map(int, rng.permutation(len(loads))[:k]))
    out = []
    for i, load in enumerate(loads):
        if i in chosen:
            out.append(replace(load, has_pv=True, pv_kw=0.5 * load.p_kw))
        else:
            out.append(replace(load, has_pv=False, pv_kw=0.0))
    return out
