"""End-to-end generation: polygon -> tessellation -> LV/MV synthesis ->
coincidence-factor sizing -> assembled grid, validated by a power-flow
smoke check.

Everything is deterministic for a fixed parameter set: the coincidence
table has its own seed (``cf_seed``) so that changing ``seed`` only moves
the PV lottery, never the topology or the electrical sizing.
"""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

from pathlib import Path

from . import lv, mv, sizing
from .geodata import GeoDataset
from .geometry import GeoPoint
from .model import Bus, Line, Load, Syngrid, Transformer, validate
from .profiles import CFTable, cf_at, estimate_cf, generate_pool
from .solver import power_flow
from .tessellate import Polytope, crop_all, hexagons_to_geojson, tessellate


class ParamsError(ValueError):
    """Invalid generation parameters; names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class GenerationError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class GenerationParams:
    boundary: list[tuple[float, float]]    # lon/lat ring, EPSG:4326
    crs_code: int
    radius_m: float = 400.0
    lv_kv: float = 0.4
    mv_kv: float = 16.0
    hv_kv: float = 110.0
    m2_per_customer: float = 50.0
    pv_penetration: float = 0.10
    s_r_kva: float = 5.0
    cod: float = 1.25
    typical_drop_pct_per_km: float = 5.0
    seed: int = 0
    cf_seed: int = 24061
    cf_pool_size: int = 256
    cf_repetitions: int = 200
    mv_offset_m: tuple[float, float] = (25.0, 25.0)

    def validate(self) -> None:
        positive = ["radius_m", "lv_kv", "mv_kv", "hv_kv", "m2_per_customer",
                    "s_r_kva", "typical_drop_pct_per_km"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ParamsError(name, "must be positive")
        if not 0.0 <= self.pv_penetration <= 1.0:
            raise ParamsError("pv_penetration", "must be within [0, 1]")
        if self.cod < 1.0:
            raise ParamsError("cod", "must be >= 1")
        if self.cf_pool_size < 64:
            raise ParamsError("cf_pool_size", "must be >= 64")
        if self.cf_repetitions < 1:
            raise ParamsError("cf_repetitions", "must be >= 1")
        if not (self.lv_kv < self.mv_kv < self.hv_kv):
            raise ParamsError("mv_kv", "voltage levels must satisfy lv < mv < hv")
        if len(self.boundary) < 3:
            raise ParamsError("boundary", "needs at least 3 vertices")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["boundary"] = [[float(lon), float(lat)] for lon, lat in self.boundary]
        doc["mv_offset_m"] = list(self.mv_offset_m)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "GenerationParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ParamsError(unknown[0], "unknown parameter")
        if "boundary" not in doc or "crs_code" not in doc:
            missing = "boundary" if "boundary" not in doc else "crs_code"
            raise ParamsError(missing, "required parameter missing")
        kwargs = dict(doc)
        kwargs["boundary"] = [tuple(p) for p in doc["boundary"]]
        if "mv_offset_m" in doc:
            kwargs["mv_offset_m"] = tuple(doc["mv_offset_m"])
        params = cls(**kwargs)
        params.validate()
        return params


@dataclass
class GenerationReport:
    polytope_count: int = 0
    lv_grid_count: int = 0
    skipped_polytopes: list[tuple[int, str]] = field(default_factory=list)
    dropped_buildings: list[str] = field(default_factory=list)
    building_total: int = 0
    consumer_total: int = 0
    stage_seconds: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "polytope_count": self.polytope_count,
            "lv_grid_count": self.lv_grid_count,
            "skipped_polytopes": [[i, r] for i, r in self.skipped_polytopes],
            "dropped_buildings": list(self.dropped_buildings),
            "building_total": self.building_total,
            "consumer_total": self.consumer_total,
            "stage_seconds": dict(self.stage_seconds),
            "warnings": list(self.warnings),
        }


# CF tables are expensive and depend only on (s_r, cf_seed, pool, k)
_cf_cache: dict[tuple, CFTable] = {}
_cf_lock = threading.Lock()


def cf_table_for(params: GenerationParams) -> CFTable:
    key = (params.s_r_kva, params.cf_seed, params.cf_pool_size,
           params.cf_repetitions)
    with _cf_lock:
        if key not in _cf_cache:
            pool = generate_pool(params.cf_pool_size, params.s_r_kva,
                                 params.cf_seed)
            _cf_cache[key] = estimate_cf(pool, params.s_r_kva,
                                         params.cf_repetitions, params.cf_seed)
        return _cf_cache[key]


def generate(params: GenerationParams, dataset: GeoDataset,
             debug_dir: str | None = None) -> tuple[Syngrid, GenerationReport]:
    """Run the full generation pipeline on an already-parsed dataset.

    Deterministic for fixed (params, dataset). Fails hard if the smoke
    power flow does not converge: a generated grid must be solvable.
    ``debug_dir`` additionally dumps the tessellation, the per-polytope LV
    trees and the sizing tables there.
    """
    params.validate()
    debug = Path(debug_dir) if debug_dir else None
    if debug:
        debug.mkdir(parents=True, exist_ok=True)
    report = GenerationReport(building_total=len(dataset.buildings))
    stages = report.stage_seconds

    t = time.perf_counter()
    polytopes = tessellate(dataset.boundary, params.radius_m)
    crops = crop_all(dataset, polytopes)
    stages["tessellate"] = time.perf_counter() - t
    report.polytope_count = len(polytopes)
    if debug:
        (debug / "polytopes.geojson").write_text(hexagons_to_geojson(polytopes))

    # fan out the per-polytope synthesis (no shared state), merge by index
    t = time.perf_counter()
    candidates = [p for p in polytopes if crops[p.index].buildings]
    report.skipped_polytopes.extend(
        (p.index, "no buildings") for p in polytopes
        if not crops[p.index].buildings)

    def synth_one(polytope: Polytope):
        try:
            return polytope.index, lv.synthesize(
                polytope.index, crops[polytope.index], params.m2_per_customer)
        except lv.SkipPolytope as exc:
            return polytope.index, exc

    syntheses: list[lv.LvSynthesis] = []
    with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
        results = dict(pool.map(synth_one, candidates))
    for polytope in candidates:
        outcome = results[polytope.index]
        if isinstance(outcome, lv.SkipPolytope):
            report.skipped_polytopes.append((polytope.index, str(outcome)))
            report.warnings.append(f"polytope {polytope.index} skipped: {outcome}")
            continue
        if outcome.dropped_buildings:
            report.dropped_buildings.extend(outcome.dropped_buildings)
            report.warnings.append(
                f"polytope {polytope.index}: {len(outcome.dropped_buildings)} "
                f"buildings outside the main road component")
        syntheses.append(outcome)
    report.skipped_polytopes.sort()
    stages["lv_synthesis"] = time.perf_counter() - t
    if debug:
        for syn in syntheses:
            (debug / f"lv{syn.polytope_index:03d}-tree.geojson").write_text(
                lv.tree_to_geojson(syn))
    if not syntheses:
        raise GenerationError("lv_synthesis", "no polytope contains buildings")

    t = time.perf_counter()
    cf_table = cf_table_for(params)
    stages["cf_table"] = time.perf_counter() - t

    t = time.perf_counter()
    tx_points = {syn.polytope_index: lv.attach_transformer(syn)
                 for syn in syntheses}
    translated = mv.translate_network(list(dataset.roads), params.mv_offset_m)
    try:
        mv_syn = mv.build_mv({str(k): p for k, p in sorted(tx_points.items())},
                             translated)
    except mv.MvSynthesisError as exc:
        raise GenerationError("mv_synthesis", str(exc)) from exc
    stages["mv_synthesis"] = time.perf_counter() - t

    t = time.perf_counter()
    try:
        grid = _assemble(params, syntheses, mv_syn, cf_table, debug)
    except sizing.SizingError as exc:
        raise GenerationError("sizing", str(exc)) from exc
    stages["sizing"] = time.perf_counter() - t
    report.lv_grid_count = len(syntheses)
    report.consumer_total = sum(ld.n_consumers for ld in grid.loads)

    t = time.perf_counter()
    flow = power_flow(grid, tolerance=1e-6, max_iter=100)
    stages["powerflow_check"] = time.perf_counter() - t
    if not flow.converged:
        raise GenerationError(
            "powerflow_check",
            f"smoke power flow did not converge (worst bus {flow.worst_bus})")
    return grid, report


def _oriented(geometry, from_node) -> tuple:
    """Edge geometry directed so it starts at ``from_node`` (a snapped key)."""
    d_start = (geometry[0][0] - from_node[0]) ** 2 + (geometry[0][1] - from_node[1]) ** 2
    d_end = (geometry[-1][0] - from_node[0]) ** 2 + (geometry[-1][1] - from_node[1]) ** 2
    return tuple(geometry) if d_start <= d_end else tuple(reversed(geometry))


def _assemble(params: GenerationParams, syntheses: list[lv.LvSynthesis],
              mv_syn: mv.MvSynthesis, cf_table: CFTable,
              debug: "Path | None" = None) -> Syngrid:
    catalog = sizing.default_catalog()
    buses: list[Bus] = []
    lines: list[Line] = []
    transformers: list[Transformer] = []
    loads: list[Load] = []
    lv_grid_index: dict[int, dict] = {}

    # MV layer first: ids per node in insertion order
    mv_ids: dict = {}
    mv_nodes = sorted(mv_syn.tree.nodes, key=lambda n: mv_syn.tree.nodes[n]["order"])
    for k, node in enumerate(mv_nodes):
        mv_ids[node] = f"mv-n{k:04d}"
    mv_consumers: dict = {}
    tap_nodes = {}
    for syn in syntheses:
        tap = mv_syn.transformer_nodes[str(syn.polytope_index)]
        tap_nodes[syn.polytope_index] = tap
        mv_consumers[tap] = mv_consumers.get(tap, 0) + syn.total_consumers

    for node in mv_nodes:
        role = "mv_root" if node == mv_syn.root else "junction"
        buses.append(Bus(mv_ids[node], "MV", params.mv_kv, GeoPoint(*node), role))

    mv_cables = sizing.size_tree_cables(
        mv_syn.tree, mv_syn.root, mv_consumers, params.mv_kv, params.cod,
        catalog, cf_table, params.s_r_kva, params.typical_drop_pct_per_km)
    if debug:
        (debug / "mv-sizing.csv").write_text(sizing.sizing_report_csv(
            mv_syn.tree, mv_syn.root, mv_consumers, mv_cables, params.mv_kv,
            cf_table, params.s_r_kva))
    for k, ((parent, child), cable) in enumerate(sorted(
            mv_cables.items(),
            key=lambda item: (mv_syn.tree.nodes[item[0][0]]["order"],
                              mv_syn.tree.nodes[item[0][1]]["order"]))):
        data = mv_syn.tree.edges[parent, child]
        geometry = _oriented(data["geometry"], parent)
        lines.append(Line(f"mv-e{k:04d}", mv_ids[parent], mv_ids[child],
                          data["length"], cable, geometry, data["kind"]))

    # HV feeder at the MV root
    hv_bus = Bus("hv-slack", "HV", params.hv_kv,
                 GeoPoint(*mv_syn.root), "hv_slack")
    buses.append(hv_bus)

    total_consumers = 0
    for syn in syntheses:
        idx = syn.polytope_index
        node_ids: dict = {}
        tree_nodes = sorted(syn.tree.nodes, key=lambda n: syn.tree.nodes[n]["order"])
        consumer_nodes = set(syn.building_nodes.values())
        grid_bus_ids = []
        for k, node in enumerate(tree_nodes):
            bus_id = f"lv{idx:03d}-n{k:04d}"
            node_ids[node] = bus_id
            if node == syn.root:
                role = "lv_root"
            elif node in consumer_nodes:
                role = "consumer"
            else:
                role = "junction"
            buses.append(Bus(bus_id, "LV", params.lv_kv, GeoPoint(*node), role))
            grid_bus_ids.append(bus_id)

        node_consumers = syn.node_consumers()
        lv_cables = sizing.size_tree_cables(
            syn.tree, syn.root, node_consumers, params.lv_kv, params.cod,
            catalog, cf_table, params.s_r_kva, params.typical_drop_pct_per_km)
        if debug:
            (debug / f"lv{idx:03d}-sizing.csv").write_text(
                sizing.sizing_report_csv(syn.tree, syn.root, node_consumers,
                                         lv_cables, params.lv_kv, cf_table,
                                         params.s_r_kva))
        grid_line_ids = []
        for k, ((parent, child), cable) in enumerate(sorted(
                lv_cables.items(),
                key=lambda item: (syn.tree.nodes[item[0][0]]["order"],
                                  syn.tree.nodes[item[0][1]]["order"]))):
            data = syn.tree.edges[parent, child]
            geometry = _oriented(data["geometry"], parent)
            line_id = f"lv{idx:03d}-e{k:04d}"
            lines.append(Line(line_id, node_ids[parent], node_ids[child],
                              data["length"], cable, geometry, data["kind"]))
            grid_line_ids.append(line_id)

        # loads: the coincident peak of the whole LV grid spread over its
        # buildings, so each grid draws n * S_r * CF(n_grid) in total
        n_grid = syn.total_consumers
        total_consumers += n_grid
        cf_grid = cf_at(cf_table, n_grid)
        for bid in sorted(syn.consumers):
            n_b = syn.consumers[bid]
            loads.append(Load(
                id=f"lv{idx:03d}-load-{bid}",
                bus=node_ids[syn.building_nodes[bid]],
                n_consumers=n_b,
                s_r_kva_per_consumer=params.s_r_kva,
                p_kw=n_b * params.s_r_kva * cf_grid,
            ))

        # MV/LV transformer sized for the grid's coincident peak
        p_m = sizing.peak_power(n_grid, params.s_r_kva, cf_table)
        s_r, v_k, p_cu = sizing.size_transformer(p_m, params.cod)
        transformers.append(Transformer(
            f"tx-lv{idx:03d}", mv_ids[tap_nodes[idx]], node_ids[syn.root],
            s_r, v_k, p_cu))
        lv_grid_index[idx] = {"buses": grid_bus_ids, "lines": grid_line_ids}

    # HV/MV feeder transformer sized for everything downstream
    p_m_total = sizing.peak_power(total_consumers, params.s_r_kva, cf_table)
    s_r, v_k, p_cu = sizing.size_transformer(p_m_total, params.cod)
    transformers.append(Transformer("tx-hv", "hv-slack",
                                    mv_ids[mv_syn.root], s_r, v_k, p_cu))

    loads = lv.assign_pv(loads, params.pv_penetration, params.seed)
    grid = Syngrid(tuple(buses), tuple(lines), tuple(transformers),
                   tuple(loads), lv_grid_index, params.to_dict())
    validate(grid)
    return grid
