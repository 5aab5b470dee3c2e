"""Canonical multi-voltage network model and its JSON / GeoJSON forms.

Every downstream stage (sizing, solving, metrics, export) reads and writes
this model. Values are immutable after construction; ``validate`` enforces
the structural invariants (radial LV/MV subgrids, single slack, referential
integrity) and is run on every load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .geometry import GeoPoint

SCHEMA_VERSION = 1

LEVEL_ORDER = {"LV": 0, "MV": 1, "HV": 2}
ROLES = frozenset({"consumer", "junction", "lv_root", "mv_root", "hv_slack"})


class ModelError(ValueError):
    """A grid document violates the model invariants."""


@dataclass(frozen=True)
class Bus:
    id: str
    level: str
    vn_kv: float
    location: GeoPoint
    role: str


@dataclass(frozen=True)
class CableType:
    name: str
    v_op_kv: float
    i_m_ka: float
    r_ohm_per_km: float
    x_ohm_per_km: float


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    length_m: float
    cable: CableType
    geometry: tuple[GeoPoint, ...]
    kind: str = "road"  # "road" or "service" (building connection stub)


@dataclass(frozen=True)
class Transformer:
    id: str
    hv_bus: str
    lv_bus: str
    s_r_mva: float
    v_k_percent: float
    p_cu_percent: float


@dataclass(frozen=True)
class Load:
    id: str
    bus: str
    n_consumers: int
    s_r_kva_per_consumer: float
    p_kw: float
    has_pv: bool = False
    pv_kw: float = 0.0


@dataclass(frozen=True)
class Syngrid:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    transformers: tuple[Transformer, ...]
    loads: tuple[Load, ...]
    lv_grid_index: Mapping[int, dict] = field(default_factory=dict)
    metadata: Mapping[str, object] = field(default_factory=dict)

    def bus_map(self) -> dict[str, Bus]:
        return {b.id: b for b in self.buses}


def _check_tree(bus_ids: Iterable[str], edges: Sequence[tuple[str, str]],
                label: str) -> None:
    nodes = list(bus_ids)
    if not nodes:
        return
    index = {b: i for i, b in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    merged = 0
    for u, v in edges:
        if u not in index or v not in index:
            raise ModelError(f"{label}: edge {u}-{v} references a bus outside the subgrid")
        ru, rv = find(index[u]), find(index[v])
        if ru == rv:
            raise ModelError(f"{label}: cycle detected at edge {u}-{v}")
        parent[ru] = rv
        merged += 1
    if merged != len(nodes) - 1:
        root0 = find(0)
        stray = next((n for i, n in enumerate(nodes) if find(i) != root0), None)
        raise ModelError(
            f"{label}: not a tree ({len(edges)} edges for {len(nodes)} buses; "
            f"bus {stray} is disconnected)")


def validate(grid: Syngrid) -> None:
    """Raise :class:`ModelError` naming the offending element on any violation."""
    buses = grid.bus_map()
    if len(buses) != len(grid.buses):
        raise ModelError("duplicate bus ids")
    for b in grid.buses:
        if b.level not in LEVEL_ORDER:
            raise ModelError(f"bus {b.id}: unknown level {b.level!r}")
        if b.role not in ROLES:
            raise ModelError(f"bus {b.id}: unknown role {b.role!r}")
        if not b.vn_kv > 0:
            raise ModelError(f"bus {b.id}: vn_kv must be positive")

    slacks = [b.id for b in grid.buses if b.role == "hv_slack"]
    if len(slacks) != 1:
        raise ModelError(f"expected exactly one hv_slack bus, found {len(slacks)}")

    for ln in grid.lines:
        for end in (ln.from_bus, ln.to_bus):
            if end not in buses:
                raise ModelError(f"line {ln.id}: unknown bus {end}")
        if buses[ln.from_bus].level != buses[ln.to_bus].level:
            raise ModelError(f"line {ln.id}: endpoints on different voltage levels")
        if not ln.length_m > 0:
            raise ModelError(f"line {ln.id}: length_m must be positive")

    for tx in grid.transformers:
        for end in (tx.hv_bus, tx.lv_bus):
            if end not in buses:
                raise ModelError(f"transformer {tx.id}: unknown bus {end}")
        hv, lv = buses[tx.hv_bus], buses[tx.lv_bus]
        if LEVEL_ORDER[hv.level] <= LEVEL_ORDER[lv.level]:
            raise ModelError(
                f"transformer {tx.id}: hv side must be a higher level than lv side")
        if not tx.s_r_mva > 0:
            raise ModelError(f"transformer {tx.id}: s_r_mva must be positive")

    for load in grid.loads:
        if load.bus not in buses:
            raise ModelError(f"load {load.id}: unknown bus {load.bus}")
        if load.n_consumers < 1:
            raise ModelError(f"load {load.id}: n_consumers must be >= 1")
        expected_pv = 0.5 * load.p_kw if load.has_pv else 0.0
        if load.pv_kw != expected_pv:
            raise ModelError(
                f"load {load.id}: pv_kw must be {expected_pv} (has_pv={load.has_pv})")

    # radiality per LV grid and exactly one lv_root each
    lines_by_id = {ln.id: ln for ln in grid.lines}
    for idx, entry in sorted(grid.lv_grid_index.items()):
        grid_buses = entry["buses"]
        grid_lines = [lines_by_id[i] for i in entry["lines"] if i in lines_by_id]
        missing = [i for i in entry["lines"] if i not in lines_by_id]
        if missing:
            raise ModelError(f"lv grid {idx}: unknown line {missing[0]}")
        _check_tree(grid_buses, [(l.from_bus, l.to_bus) for l in grid_lines],
                    f"lv grid {idx}")
        roots = [b for b in grid_buses if b in buses and buses[b].role == "lv_root"]
        if len(roots) != 1:
            raise ModelError(f"lv grid {idx}: expected exactly one lv_root, found {len(roots)}")

    # radiality of the MV grid
    mv_buses = [b.id for b in grid.buses if b.level == "MV"]
    mv_edges = [(l.from_bus, l.to_bus) for l in grid.lines
                if buses[l.from_bus].level == "MV"]
    _check_tree(mv_buses, mv_edges, "mv grid")

    # the whole network hangs together through transformers
    if grid.buses:
        adjacency: dict[str, list[str]] = {b.id: [] for b in grid.buses}
        for ln in grid.lines:
            adjacency[ln.from_bus].append(ln.to_bus)
            adjacency[ln.to_bus].append(ln.from_bus)
        for tx in grid.transformers:
            adjacency[tx.hv_bus].append(tx.lv_bus)
            adjacency[tx.lv_bus].append(tx.hv_bus)
        seen = {slacks[0]}
        stack = [slacks[0]]
        while stack:
            for nxt in adjacency[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        unreachable = sorted(set(adjacency) - seen)
        if unreachable:
            raise ModelError(f"bus {unreachable[0]} is not connected to the slack bus")


# ---------------------------------------------------------------------------
# JSON serialization (deterministic: stable element order by id, fixed keys)


def _point_list(points: Iterable[GeoPoint]) -> list[list[float]]:
    return [[p.x, p.y] for p in points]


def to_dict(grid: Syngrid) -> dict:
    cables = {}
    for ln in grid.lines:
        cables[ln.cable.name] = ln.cable
    return {
        "syngrid_schema": SCHEMA_VERSION,
        "metadata": dict(grid.metadata),
        "cables": [
            {"name": c.name, "v_op_kv": c.v_op_kv, "i_m_ka": c.i_m_ka,
             "r_ohm_per_km": c.r_ohm_per_km, "x_ohm_per_km": c.x_ohm_per_km}
            for _, c in sorted(cables.items())
        ],
        "buses": [
            {"id": b.id, "level": b.level, "vn_kv": b.vn_kv,
             "location": [b.location.x, b.location.y], "role": b.role}
            for b in sorted(grid.buses, key=lambda b: b.id)
        ],
        "lines": [
            {"id": l.id, "from_bus": l.from_bus, "to_bus": l.to_bus,
             "length_m": l.length_m, "cable": l.cable.name,
             "geometry": _point_list(l.geometry), "kind": l.kind}
            for l in sorted(grid.lines, key=lambda l: l.id)
        ],
        "transformers": [
            {"id": t.id, "hv_bus": t.hv_bus, "lv_bus": t.lv_bus,
             "s_r_mva": t.s_r_mva, "v_k_percent": t.v_k_percent,
             "p_cu_percent": t.p_cu_percent}
            for t in sorted(grid.transformers, key=lambda t: t.id)
        ],
        "loads": [
            {"id": ld.id, "bus": ld.bus, "n_consumers": ld.n_consumers,
             "s_r_kva_per_consumer": ld.s_r_kva_per_consumer, "p_kw": ld.p_kw,
             "has_pv": ld.has_pv, "pv_kw": ld.pv_kw}
            for ld in sorted(grid.loads, key=lambda ld: ld.id)
        ],
        "lv_grids": {
            str(idx): {"buses": sorted(entry["buses"]), "lines": sorted(entry["lines"])}
            for idx, entry in sorted(grid.lv_grid_index.items())
        },
    }


def save(grid: Syngrid) -> bytes:
    validate(grid)
    return json.dumps(to_dict(grid), indent=1).encode("utf-8")


def from_dict(doc: dict) -> Syngrid:
    schema = doc.get("syngrid_schema")
    if schema != SCHEMA_VERSION:
        raise ModelError(f"unsupported syngrid_schema {schema!r}, expected {SCHEMA_VERSION}")
    cables = {c["name"]: CableType(c["name"], c["v_op_kv"], c["i_m_ka"],
                                   c["r_ohm_per_km"], c["x_ohm_per_km"])
              for c in doc.get("cables", [])}
    buses = tuple(
        Bus(b["id"], b["level"], b["vn_kv"], GeoPoint(*b["location"]), b["role"])
        for b in doc.get("buses", []))
    lines = []
    for l in doc.get("lines", []):
        if l["cable"] not in cables:
            raise ModelError(f"line {l['id']}: unknown cable {l['cable']!r}")
        lines.append(Line(
            l["id"], l["from_bus"], l["to_bus"], l["length_m"], cables[l["cable"]],
            tuple(GeoPoint(*p) for p in l["geometry"]), l.get("kind", "road")))
    transformers = tuple(
        Transformer(t["id"], t["hv_bus"], t["lv_bus"], t["s_r_mva"],
                    t["v_k_percent"], t["p_cu_percent"])
        for t in doc.get("transformers", []))
    loads = tuple(
        Load(ld["id"], ld["bus"], ld["n_consumers"], ld["s_r_kva_per_consumer"],
             ld["p_kw"], ld["has_pv"], ld["pv_kw"])
        for ld in doc.get("loads", []))
    lv_index = {int(k): {"buses": list(v["buses"]), "lines": list(v["lines"])}
                for k, v in doc.get("lv_grids", {}).items()}
    grid = Syngrid(buses, tuple(lines), transformers, loads, lv_index,
                   doc.get("metadata", {}))
    validate(grid)
    return grid


def load(data: bytes | str) -> Syngrid:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError(f"grid document is not valid JSON: {exc}") from exc
    return from_dict(doc)


# ---------------------------------------------------------------------------
# GeoJSON export


def to_geojson(grid: Syngrid) -> bytes:
    """One Feature per bus (Point), line (LineString) and transformer (Point)."""
    features = []
    bus_map = grid.bus_map()
    for b in sorted(grid.buses, key=lambda b: b.id):
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [b.location.x, b.location.y]},
            "properties": {"kind": "bus", "id": b.id, "level": b.level,
                           "role": b.role, "vn_kv": b.vn_kv},
        })
    for l in sorted(grid.lines, key=lambda l: l.id):
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": _point_list(l.geometry)},
            "properties": {"kind": l.kind, "id": l.id,
                           "level": bus_map[l.from_bus].level,
                           "length_m": l.length_m, "cable": l.cable.name},
        })
    for t in sorted(grid.transformers, key=lambda t: t.id):
        loc = bus_map[t.lv_bus].location
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [loc.x, loc.y]},
            "properties": {"kind": "transformer", "id": t.id,
                           "s_r_mva": t.s_r_mva, "v_k_percent": t.v_k_percent,
                           "p_cu_percent": t.p_cu_percent},
        })
    doc = {"type": "FeatureCollection", "features": features}
    return json.dumps(doc, indent=1).encode("utf-8")
