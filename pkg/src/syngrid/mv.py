"""MV grid synthesis over a translated copy of the road network.

The MV layer reuses the full (un-tessellated) road set, shifted by a
fixed offset so it does not overlap the LV grids visually. Every MV/LV
transformer bus taps the translated network; the MV grid is the union of
shortest paths from those taps to the most connected road node, which
then receives the HV/MV feeder.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .geodata import RoadSegment
from .geometry import GeoPoint
from .spatial import (NodeKey, attach_point, build_spatial_graph, choose_root,
                      largest_component, shortest_path_tree)


class MvSynthesisError(Exception):
    """MV grid cannot reach every transformer bus."""

    def __init__(self, message: str, orphaned: list[str] | None = None):
        super().__init__(message)
        self.orphaned = orphaned or []


def translate_network(roads: list[RoadSegment],
                      offset: tuple[float, float]) -> list[RoadSegment]:
    """Shift every polyline by (dx, dy); an isometry, so lengths are kept."""
    dx, dy = offset
    return [RoadSegment(r.id,
                        tuple(GeoPoint(p.x + dx, p.y + dy) for p in r.polyline),
                        r.length_m)
            for r in roads]


@dataclass
class MvSynthesis:
    tree: nx.Graph
    root: NodeKey
    transformer_nodes: dict[str, NodeKey]  # lv-grid key -> MV bus node


def build_mv(transformer_points: dict[str, GeoPoint],
             translated_roads: list[RoadSegment]) -> MvSynthesis:
    """Radial MV tree connecting all transformer connection points.

    ``transformer_points`` maps a stable per-LV-grid key to the MV bus
    location (the LV root). Raises :class:`MvSynthesisError` when any
    point cannot reach the kept road component.
    """
    if not transformer_points:
        raise MvSynthesisError("no transformer buses to connect")
    if not translated_roads:
        raise MvSynthesisError("no translated roads",
                               orphaned=sorted(transformer_points))
    sg = build_spatial_graph(translated_roads)
    nodes = {key: attach_point(sg, pt, f"mvtap-{key}")
             for key, pt in sorted(transformer_points.items())}

    component = largest_component(sg)
    orphaned = sorted(key for key, node in nodes.items() if node not in component)
    if orphaned:
        raise MvSynthesisError(
            f"transformer buses not reachable over the translated road network: "
            f"{orphaned}", orphaned=orphaned)

    root = choose_root(sg, component)
    targets = [nodes[key] for key in sorted(nodes)]
    tree = shortest_path_tree(sg, root, targets)
    return MvSynthesis(tree, root, nodes)


def attach_hv_feeder(synthesis: MvSynthesis) -> GeoPoint:
    """HV slack bus placement: co-located with the MV root.

    The HV/MV transformer parameters are filled in by sizing; exactly one
    HV bus and one feeder transformer exist per generated grid.
    """
    return GeoPoint(*synthesis.root)
