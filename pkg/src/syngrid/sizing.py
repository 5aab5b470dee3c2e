"""Electrical sizing: cables per line, ratings per transformer.

Consumer counts aggregate from the leaves toward the root; each edge is
sized for the coincident peak of its downstream consumers, with a
coefficient of overdimensioning (COD) as safety margin. Transformer
short-circuit voltage and copper losses follow empirical log-fits of
catalog data.
"""

from __future__ import annotations

import json
import logging
import math
from importlib import resources

import networkx as nx

from .model import CableType
from .profiles import CFTable, cf_at

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)

P_CU_BOUNDS = (0.5, 3.0)   # percent
V_K_BOUNDS = (2.0, 15.0)   # percent


class SizingError(ValueError):
    """No adequate equipment for the computed demand."""


def default_catalog() -> list[CableType]:
    raw = resources.files("syngrid.data").joinpath("cables.json").read_text()
    return catalog_from_json(raw)


def catalog_from_json(raw: str | bytes) -> list[CableType]:
    doc = json.loads(raw)
    return [CableType(c["name"], c["v_op_kv"], c["i_m_ka"],
                      c["r_ohm_per_km"], c["x_ohm_per_km"])
            for c in doc["cables"]]


def aggregate_consumers(tree: nx.Graph, root,
                        node_consumers: dict) -> dict[tuple, int]:
    """Consumers served through each edge (keyed as the (parent, child) pair).

    Every edge carries the total consumer count of the subtree below it;
    edges adjacent to the root therefore sum to the grid total.
    """
    unknown = [n for n in node_consumers if n not in tree]
    if unknown:
        raise SizingError(f"load node {unknown[0]} is not part of the tree")
    counts: dict[tuple, int] = {}

    # iterative post-order to survive deep feeders
    totals: dict = {}
    order = list(nx.dfs_postorder_nodes(tree, root))
    parents = {child: parent for parent, child in nx.bfs_edges(tree, root)}
    for node in order:
        subtotal = node_consumers.get(node, 0)
        for nbr in tree.neighbors(node):
            if parents.get(nbr) == node:
                subtotal += totals[nbr]
        totals[node] = subtotal
        parent = parents.get(node)
        if parent is not None:
            counts[(parent, node)] = subtotal
    return counts


def peak_power(n: int, s_r_kva: float, cf_table: CFTable) -> float:
    """Coincident peak of n homogeneous consumers: n * S_r * CF(n), in kW."""
    if n < 1:
        raise ValueError(f"consumer count must be >= 1, got {n}")
    return n * s_r_kva * cf_at(cf_table, n)


def line_current(p_m_kw: float, v_n_kv: float) -> float:
    """Per-phase current in A for a three-phase flow of ``p_m_kw``."""
    if v_n_kv <= 0:
        raise ValueError("v_n_kv must be positive")
    return (p_m_kw * 1000.0) / (SQRT3 * v_n_kv * 1000.0)


def voltage_window(v_n_kv: float, cable: CableType) -> bool:
    return 0.5 * v_n_kv <= cable.v_op_kv <= 1.5 * v_n_kv


def select_cable(i_1ph_a: float, v_n_kv: float, cod: float,
                 catalog: list[CableType]) -> CableType:
    """Cheapest adequate cable: operating voltage within [0.5, 1.5] * V_n
    and ampacity at least COD times the expected current."""
    if not catalog:
        raise SizingError("cable catalog is empty")
    if cod < 1:
        raise ValueError("cod must be >= 1")
    required_a = cod * i_1ph_a
    feasible = [c for c in catalog
                if voltage_window(v_n_kv, c) and c.i_m_ka * 1000.0 >= required_a]
    if not feasible:
        raise SizingError(
            f"no cable with ampacity >= {required_a:.1f} A at {v_n_kv} kV")
    return min(feasible, key=lambda c: (c.i_m_ka, c.name))


def parallel_cable(cable: CableType, count: int) -> CableType:
    """``count`` identical cables in parallel as one equivalent type."""
    return CableType(f"{count}x {cable.name}", cable.v_op_kv,
                     cable.i_m_ka * count, cable.r_ohm_per_km / count,
                     cable.x_ohm_per_km / count)


def drop_pct_per_km(cable: CableType, i_1ph_a: float, v_n_kv: float) -> float:
    """Modeled voltage drop per km at the design current, percent of V_n."""
    return SQRT3 * i_1ph_a * cable.r_ohm_per_km / (v_n_kv * 1000.0) * 100.0


def select_cable_for_edge(i_1ph_a: float, v_n_kv: float, cod: float,
                          catalog: list[CableType],
                          max_drop_pct_per_km: float | None = None) -> CableType:
    """Cable selection with the drop check and the parallel-cable fallback.

    If no single catalog entry is adequate, identical cables are paralleled
    (2x, 4x, ...) starting from the largest one in the voltage window. If a
    drop limit is set, the cable is upsized until the modeled drop per km
    at the design current stays below it (or options run out).
    """
    window = sorted((c for c in catalog if voltage_window(v_n_kv, c)),
                    key=lambda c: (c.i_m_ka, c.name))
    if not window:
        raise SizingError(f"no cable in the voltage window around {v_n_kv} kV")
    try:
        cable = select_cable(i_1ph_a, v_n_kv, cod, catalog)
    except SizingError:
        biggest = window[-1]
        count = 2
        while biggest.i_m_ka * count * 1000.0 < cod * i_1ph_a:
            count *= 2
        cable = parallel_cable(biggest, count)

    if max_drop_pct_per_km is not None:
        candidates = [c for c in window if c.i_m_ka >= cable.i_m_ka] or [cable]
        if cable not in candidates:
            candidates.insert(0, cable)
        for candidate in candidates:
            cable = candidate
            if drop_pct_per_km(cable, i_1ph_a, v_n_kv) <= max_drop_pct_per_km:
                break
    return cable


def size_transformer(p_m_kw: float, cod: float) -> tuple[float, float, float]:
    """Empirical transformer parameters from the coincident peak.

    Returns (S_r in MVA, V_k percent, P_Cu percent). S_r covers the peak
    with the COD margin; V_k and P_Cu follow log-fits of catalog data and
    are clamped to physical bounds.
    """
    if p_m_kw <= 0:
        raise ValueError("p_m_kw must be positive")
    s_r_mva = p_m_kw * cod / 1000.0
    log_term = math.log10(10.0 * s_r_mva)
    p_cu = 1.5 + (-0.7 / 3.0) * log_term
    v_k = 4.0 + (8.0 / 3.0) * log_term
    if not P_CU_BOUNDS[0] <= p_cu <= P_CU_BOUNDS[1]:
        clamped = min(max(p_cu, P_CU_BOUNDS[0]), P_CU_BOUNDS[1])
        logger.warning("P_Cu %.3f%% outside %s for S_r=%.4f MVA, clamped to %.2f%%",
                       p_cu, P_CU_BOUNDS, s_r_mva, clamped)
        p_cu = clamped
    if not V_K_BOUNDS[0] <= v_k <= V_K_BOUNDS[1]:
        clamped = min(max(v_k, V_K_BOUNDS[0]), V_K_BOUNDS[1])
        logger.warning("V_k %.3f%% outside %s for S_r=%.4f MVA, clamped to %.2f%%",
                       v_k, V_K_BOUNDS, s_r_mva, clamped)
        v_k = clamped
    return s_r_mva, v_k, p_cu


def sizing_report_csv(tree: nx.Graph, root, node_consumers: dict,
                      cables: dict[tuple, CableType], v_n_kv: float,
                      cf_table: CFTable, s_r_kva: float) -> str:
    """Per-edge sizing summary: consumers, design load and selected cable."""
    counts = aggregate_consumers(tree, root, node_consumers)
    rows = ["edge,consumers,p_m_kw,i_1ph_a,cable,i_m_a,drop_pct_per_km"]
    for edge, cable in cables.items():
        n = counts[edge]
        p_m = peak_power(n, s_r_kva, cf_table) if n else 0.0
        i_a = line_current(p_m, v_n_kv)
        rows.append(
            f"{edge[0]}->{edge[1]},{n},{p_m:.3f},{i_a:.3f},{cable.name},"
            f"{cable.i_m_ka * 1000:.0f},{drop_pct_per_km(cable, i_a, v_n_kv):.4f}")
    return "\n".join(rows) + "\n"


def size_tree_cables(tree: nx.Graph, root, node_consumers: dict,
                     v_n_kv: float, cod: float, catalog: list[CableType],
                     cf_table: CFTable, s_r_kva: float,
                     max_drop_pct_per_km: float | None = None) -> dict[tuple, CableType]:
    """Cable per tree edge, keyed (parent, child). Edges serving zero
    consumers get the smallest cable in the voltage window."""
    counts = aggregate_consumers(tree, root, node_consumers)
    if sum(node_consumers.values()) == 0:
        raise SizingError("tree serves no consumers")
    cables = {}
    for edge, n in counts.items():
        if n == 0:
            i_a = 0.0
        else:
            i_a = line_current(peak_power(n, s_r_kva, cf_table), v_n_kv)
        cables[edge] = select_cable_for_edge(i_a, v_n_kv, cod, catalog,
                                             max_drop_pct_per_km)
    return cables
