"""Hexagonal tessellation of the boundary polygon, one LV grid per cell.

Pointy-top regular hexagons on an axial lattice anchored at the boundary
centroid; ``radius_m`` is the center-to-vertex distance. Cells are indexed
row-major (bottom row first, then left to right) over the cells that
actually overlap the boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from shapely.geometry import LineString, Point, Polygon

from .geodata import BoundaryError, GeoDataset, RoadSegment
from .geometry import GeoPoint, polyline_length, ring_centroid

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Polytope:
    index: int
    hexagon: tuple[GeoPoint, ...]
    center: GeoPoint
    radius_m: float


def hexagon_ring(center: GeoPoint, radius_m: float) -> tuple[GeoPoint, ...]:
    """Vertices of a pointy-top regular hexagon, counterclockwise from the top."""
    cx, cy = center
    w = SQRT3 * radius_m / 2.0
    h = radius_m / 2.0
    return (
        GeoPoint(cx, cy + radius_m),
        GeoPoint(cx - w, cy + h),
        GeoPoint(cx - w, cy - h),
        GeoPoint(cx, cy - radius_m),
        GeoPoint(cx + w, cy - h),
        GeoPoint(cx + w, cy + h),
    )


def lattice_center(anchor: GeoPoint, row: int, col: int, radius_m: float) -> GeoPoint:
    """Center of lattice cell (row, col); odd rows shift half a cell east."""
    x = anchor.x + SQRT3 * radius_m * (col + 0.5 * (row & 1))
    y = anchor.y + 1.5 * radius_m * row
    return GeoPoint(x, y)


def tessellate(boundary: Sequence[GeoPoint], radius_m: float) -> list[Polytope]:
    """Hexagons of the lattice that overlap the boundary polygon.

    Overlap means positive intersection area, so a boundary equal to one
    lattice cell yields exactly that cell (edge-touching neighbours are
    excluded).
    """
    if radius_m <= 0:
        raise ValueError(f"radius_m must be positive, got {radius_m}")
    poly = Polygon(boundary)
    if not poly.is_valid or poly.area <= 0.0:
        raise BoundaryError("boundary polygon is degenerate (zero area or invalid)")

    anchor = GeoPoint(*ring_centroid(boundary))
    minx, miny, maxx, maxy = poly.bounds
    row_lo = math.floor((miny - anchor.y) / (1.5 * radius_m)) - 1
    row_hi = math.ceil((maxy - anchor.y) / (1.5 * radius_m)) + 1
    col_lo = math.floor((minx - anchor.x) / (SQRT3 * radius_m)) - 1
    col_hi = math.ceil((maxx - anchor.x) / (SQRT3 * radius_m)) + 1

    # overlap must clearly exceed FP slivers from near-tangent cells
    cell_area = 1.5 * SQRT3 * radius_m * radius_m
    min_overlap = 1e-9 * cell_area

    cells: list[Polytope] = []
    for row in range(row_lo, row_hi + 1):
        for col in range(col_lo, col_hi + 1):
            center = lattice_center(anchor, row, col, radius_m)
            ring = hexagon_ring(center, radius_m)
            if poly.intersection(Polygon(ring)).area > min_overlap:
                cells.append(Polytope(len(cells), ring, center, radius_m))
    return cells


def crop(dataset: GeoDataset, polytope: Polytope) -> GeoDataset:
    """Clip roads to the hexagon; keep buildings whose centroid it covers.

    The hexagon is treated as closed, so a centroid exactly on a shared
    edge is covered by both neighbours; :func:`crop_all` resolves that tie
    to the lower polytope index.
    """
    hex_poly = Polygon(polytope.hexagon)
    roads: list[RoadSegment] = []
    for road in dataset.roads:
        inter = LineString(road.polyline).intersection(hex_poly)
        if inter.is_empty:
            continue
        parts = [inter] if inter.geom_type == "LineString" else [
            g for g in getattr(inter, "geoms", []) if g.geom_type == "LineString"]
        multipart = len(parts) > 1
        for k, part in enumerate(parts):
            pts = tuple(GeoPoint(x, y) for x, y in part.coords)
            if len(pts) < 2:
                continue
            length = polyline_length(pts)
            if length <= 0.0:
                continue
            seg_id = f"{road.id}@{k}" if multipart else road.id
            roads.append(RoadSegment(seg_id, pts, length))
    buildings = tuple(b for b in dataset.buildings
                      if hex_poly.covers(Point(b.centroid)))
    return GeoDataset(tuple(roads), buildings, polytope.hexagon, dataset.crs_code)


def crop_all(dataset: GeoDataset, polytopes: Sequence[Polytope]) -> dict[int, GeoDataset]:
    """Crop per polytope with buildings partitioned exactly once.

    A centroid on a shared hexagon edge goes to the lower polytope index;
    every input building inside some cell appears in exactly one crop.
    """
    crops: dict[int, GeoDataset] = {}
    seen: set[str] = set()
    for polytope in polytopes:
        c = crop(dataset, polytope)
        kept = tuple(b for b in c.buildings if b.id not in seen)
        seen.update(b.id for b in kept)
        crops[polytope.index] = GeoDataset(c.roads, kept, c.boundary, c.crs_code)
    return crops


def hexagons_to_geojson(polytopes: Iterable[Polytope]) -> str:
    """Debug export of the lattice as a GeoJSON FeatureCollection."""
    features = []
    for p in polytopes:
        coords = [[v.x, v.y] for v in p.hexagon] + [[p.hexagon[0].x, p.hexagon[0].y]]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [coords]},
            "properties": {"index": p.index, "radius_m": p.radius_m},
        })
    return json.dumps({"type": "FeatureCollection", "features": features})
