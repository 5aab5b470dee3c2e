"""Synthetic medium/low-voltage distribution grids from OpenStreetMap data.

Typical use: parse an OSM extract, run the generation pipeline, then
validate the result electrically.

    from syngrid import GenerationParams, generate, parse_osm, power_flow

    dataset = parse_osm(raw_xml, boundary, crs_code=32632)
    grid, report = generate(GenerationParams(boundary, 32632), dataset)
    flow = power_flow(grid)
"""

from .geodata import (Building, GeoDataset, RoadSegment, fetch_overpass,
                      parse_osm)
from .geometry import GeoPoint
from .metrics import (avg_lv_diameter_km, customers_per_km, lv_grid_count,
                      metrics_report)
from .model import (Bus, CableType, Line, Load, ModelError, Syngrid,
                    Transformer, load, save, to_geojson, validate)
from .pipeline import (GenerationError, GenerationParams, GenerationReport,
                       generate)
from .profiles import CFTable, LoadProfile, cf_at, estimate_cf, generate_pool
from .projection import project, unproject
from .sizing import (aggregate_consumers, line_current, peak_power,
                     select_cable, size_transformer)
from .solver import FaultReport, SolveReport, power_flow, short_circuit
from .tessellate import Polytope, crop, crop_all, tessellate

__version__ = "0.1.0"

__all__ = [
    "Building", "Bus", "CFTable", "CableType", "FaultReport", "GeoDataset",
    "GenerationError", "GenerationParams", "GenerationReport", "GeoPoint",
    "Line", "Load", "LoadProfile", "ModelError", "Polytope", "RoadSegment",
    "SolveReport", "Syngrid", "Transformer", "aggregate_consumers",
    "avg_lv_diameter_km", "cf_at", "crop", "crop_all", "customers_per_km",
    "estimate_cf", "fetch_overpass", "generate", "generate_pool",
    "line_current", "load", "lv_grid_count", "metrics_report", "parse_osm",
    "peak_power", "power_flow", "project", "save", "select_cable",
    "short_circuit", "size_transformer", "tessellate", "to_geojson",
    "unproject", "validate",
]
