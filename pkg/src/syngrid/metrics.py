"""Topological statistics of a generated grid.

Three comparison figures: customers per km of line, number of LV grids
(MV/LV transformers), and the average LV grid diameter, where diameter is
the longest tree path (in km) between any two vertices of an LV grid.
"""

from __future__ import annotations

import json

import networkx as nx

from .model import Syngrid


def customers_per_km(grid: Syngrid) -> float:
    """Total consumers divided by total line length in km (lines only,
    transformers excluded)."""
    total_m = sum(ln.length_m for ln in grid.lines)
    if total_m <= 0:
        raise ValueError("grid has no line length")
    consumers = sum(ld.n_consumers for ld in grid.loads)
    return consumers / (total_m / 1000.0)


def lv_grid_count(grid: Syngrid) -> int:
    """Number of MV/LV transformers."""
    buses = grid.bus_map()
    return sum(1 for tx in grid.transformers
               if buses[tx.hv_bus].level == "MV" and buses[tx.lv_bus].level == "LV")


def tree_diameter_m(tree: nx.Graph) -> float:
    """Longest weighted path between any two nodes of a tree.

    Two sweeps: the farthest node from an arbitrary start is one end of a
    diameter, and the farthest node from that end gives its length.
    """
    if tree.number_of_nodes() <= 1:
        return 0.0
    start = next(iter(tree.nodes))
    dist = nx.single_source_dijkstra_path_length(tree, start, weight="length")
    far = max(dist, key=lambda n: (dist[n], str(n)))
    dist2 = nx.single_source_dijkstra_path_length(tree, far, weight="length")
    return max(dist2.values())


def avg_lv_diameter_km(grid: Syngrid) -> float:
    """Mean over all LV grids of the tree diameter, in km."""
    if not grid.lv_grid_index:
        raise ValueError("grid has no LV grids")
    lines = {ln.id: ln for ln in grid.lines}
    diameters = []
    for idx, entry in sorted(grid.lv_grid_index.items()):
        tree = nx.Graph()
        tree.add_nodes_from(entry["buses"])
        for line_id in entry["lines"]:
            ln = lines[line_id]
            tree.add_edge(ln.from_bus, ln.to_bus, length=ln.length_m)
        diameters.append(tree_diameter_m(tree))
    return sum(diameters) / len(diameters) / 1000.0


def metrics_report(grid: Syngrid) -> dict:
    return {
        "customers_per_km": customers_per_km(grid),
        "lv_grid_count": lv_grid_count(grid),
        "avg_lv_diameter_km": avg_lv_diameter_km(grid),
    }


def metrics_to_text(report: dict) -> str:
    rows = [
        ("Number of customers per km", f"{report['customers_per_km']:.1f}"),
        ("Number of LV grids", str(report["lv_grid_count"])),
        ("Average diameter of all the LV grids",
         f"{report['avg_lv_diameter_km']:.3f} km"),
    ]
    width = max(len(r[0]) for r in rows) + 2
    lines = [f"{'Quantity':<{width}}Syngrid"]
    lines += [f"{name:<{width}}{value}" for name, value in rows]
    return "\n".join(lines)


def metrics_to_json(report: dict) -> str:
    return json.dumps(report, indent=1)
