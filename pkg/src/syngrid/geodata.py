"""OSM map ingestion: parse, project, and clip roads and buildings.

Input is the OSM XML v0.6 element subset (node / way / nd / tag, plus
building multipolygon relations reduced to their outer ring). Output is a
:class:`GeoDataset` in a projected CRS, clipped to the requested boundary.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx
from shapely.geometry import LineString, Point, Polygon

from .geometry import GeoPoint, polyline_length, ring_centroid, shoelace_area
from .projection import project

# highway classes that carry distribution feeders; footways and paths are out
HIGHWAY_CLASSES = frozenset({
    "residential", "tertiary", "secondary", "primary",
    "unclassified", "service", "living_street",
})

DEFAULT_OVERPASS_URL = "https://overpass-api.de/api/interpreter"
CACHE_DIR_ENV = "SYNGRID_CACHE_DIR"


class OsmParseError(ValueError):
    """Malformed OSM XML; carries the (line, column) of the failure."""

    def __init__(self, message: str, position: tuple[int, int] | None = None):
        super().__init__(message)
        self.position = position


class BoundaryError(ValueError):
    """Boundary polygon fails validation (fewer than 3 vertices, zero area)."""


class TransportError(RuntimeError):
    """Overpass request failed after all retry attempts."""


class ThrottleError(RuntimeError):
    """Overpass responded with a rate-limit status."""


@dataclass(frozen=True)
class RoadSegment:
    id: str
    polyline: tuple[GeoPoint, ...]
    length_m: float


@dataclass(frozen=True)
class Building:
    id: str
    footprint: tuple[GeoPoint, ...]
    area_m2: float
    centroid: GeoPoint


@dataclass(frozen=True)
class GeoDataset:
    roads: tuple[RoadSegment, ...]
    buildings: tuple[Building, ...]
    boundary: tuple[GeoPoint, ...]
    crs_code: int


def _validate_boundary(boundary: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    ring = [tuple(p) for p in boundary]
    if ring and ring[0] == ring[-1]:
        ring = ring[:-1]
    if len(ring) < 3:
        raise BoundaryError(f"boundary needs at least 3 vertices, got {len(ring)}")
    return ring


def project_boundary(boundary: Sequence[tuple[float, float]], crs_code: int) -> tuple[GeoPoint, ...]:
    ring = _validate_boundary(boundary)
    return tuple(project(lon, lat, crs_code) for lon, lat in ring)


def parse_osm(raw: bytes | str, boundary: Sequence[tuple[float, float]],
              crs_code: int) -> GeoDataset:
    """Parse OSM XML, project to ``crs_code``, and clip to ``boundary``.

    ``boundary`` is a lon/lat ring. Highways become :class:`RoadSegment`
    (geometrically clipped; a road leaving and re-entering the boundary
    yields one segment per part). Closed building ways are kept iff their
    centroid lies inside the boundary.
    """
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    boundary_proj = project_boundary(boundary, crs_code)
    boundary_poly = Polygon(boundary_proj)

    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise OsmParseError(f"malformed OSM XML: {exc}", exc.position) from exc

    nodes: dict[str, GeoPoint] = {}
    for el in root.iter("node"):
        nodes[el.attrib["id"]] = project(
            float(el.attrib["lon"]), float(el.attrib["lat"]), crs_code)

    roads: list[RoadSegment] = []
    buildings: list[Building] = []
    ways: dict[str, list[str]] = {}

    for el in root.iter("way"):
        way_id = el.attrib["id"]
        refs = [nd.attrib["ref"] for nd in el.iter("nd")]
        tags = {t.attrib["k"]: t.attrib["v"] for t in el.iter("tag")}
        ways[way_id] = refs
        pts = [nodes[r] for r in refs if r in nodes]
        if tags.get("highway") in HIGHWAY_CLASSES and len(pts) >= 2:
            roads.extend(_clip_road(way_id, pts, boundary_poly))
        elif "building" in tags and len(refs) >= 4 and refs[0] == refs[-1]:
            b = _make_building(way_id, pts)
            if b is not None and boundary_poly.covers(Point(b.centroid)):
                buildings.append(b)

    # building multipolygon relations: keep the outer ring only
    for el in root.iter("relation"):
        tags = {t.attrib["k"]: t.attrib["v"] for t in el.iter("tag")}
        if "building" not in tags:
            continue
        for member in el.iter("member"):
            if member.attrib.get("role") == "outer" and member.attrib.get("type") == "way":
                refs = ways.get(member.attrib["ref"], [])
                pts = [nodes[r] for r in refs if r in nodes]
                if len(refs) >= 4 and refs[0] == refs[-1]:
                    b = _make_building(f"rel{el.attrib['id']}", pts)
                    if b is not None and boundary_poly.covers(Point(b.centroid)):
                        buildings.append(b)
                break

    roads.sort(key=lambda r: _id_sort_key(r.id))
    buildings.sort(key=lambda b: _id_sort_key(b.id))
    return GeoDataset(tuple(roads), tuple(buildings), boundary_proj, crs_code)


def _id_sort_key(ident: str) -> tuple:
    head = ident.split("#")[0].lstrip("rel")
    part = int(ident.split("#")[1]) if "#" in ident else 0
    return (ident.startswith("rel"), int(head) if head.isdigit() else 0, ident, part)


def _make_building(way_id: str, pts: list[GeoPoint]) -> Building | None:
    ring = pts[:-1] if pts and pts[0] == pts[-1] else pts
    if len(ring) < 3:
        return None
    area = shoelace_area(ring)
    if area <= 0.0:
        return None
    cx, cy = ring_centroid(ring)
    return Building(way_id, tuple(ring), area, GeoPoint(cx, cy))


def _clip_road(way_id: str, pts: list[GeoPoint], boundary: Polygon) -> list[RoadSegment]:
    line = LineString(pts)
    inter = line.intersection(boundary)
    if inter.is_empty:
        return []
    parts = [inter] if inter.geom_type == "LineString" else [
        g for g in getattr(inter, "geoms", []) if g.geom_type == "LineString"]
    out = []
    multipart = len(parts) > 1
    for k, part in enumerate(parts):
        poly = tuple(GeoPoint(x, y) for x, y in part.coords)
        if len(poly) < 2:
            continue
        length = polyline_length(poly)
        if length <= 0.0:
            continue
        seg_id = f"{way_id}#{k}" if multipart else way_id
        out.append(RoadSegment(seg_id, poly, length))
    return out


# ---------------------------------------------------------------------------
# Overpass client with on-disk cache

_endpoint_locks: dict[str, threading.Lock] = {}
_locks_guard = threading.Lock()


def _endpoint_lock(endpoint: str) -> threading.Lock:
    with _locks_guard:
        return _endpoint_locks.setdefault(endpoint, threading.Lock())


def boundary_cache_key(boundary: Sequence[tuple[float, float]]) -> str:
    canon = json.dumps([[float(x), float(y)] for x, y in boundary])
    return hashlib.sha256(canon.encode("ascii")).hexdigest()


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_DIR_ENV, "cache"))


def overpass_query(boundary: Sequence[tuple[float, float]]) -> str:
    ring = _validate_boundary(boundary)
    poly = " ".join(f"{lat:.7f} {lon:.7f}" for lon, lat in ring)
    return (
        '[out:xml][timeout:90];('
        f'way["highway"](poly:"{poly}");'
        f'way["building"](poly:"{poly}");'
        ');(._;>;);out body;'
    )


def fetch_overpass(boundary: Sequence[tuple[float, float]],
                   endpoint: str = DEFAULT_OVERPASS_URL,
                   cache_dir: str | Path | None = None,
                   max_attempts: int = 3,
                   backoff_s: float = 1.0,
                   timeout_s: float = 120.0) -> bytes:
    """Fetch OSM XML for ``boundary``, serving repeats from the disk cache.

    Requests to one endpoint are serialized to respect Overpass rate
    limits. HTTP failures are retried ``max_attempts`` times with
    exponential backoff before raising :class:`TransportError`; a 429
    raises :class:`ThrottleError` immediately.
    """
    cache_root = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache_file = cache_root / f"{boundary_cache_key(boundary)}.osm.xml"
    if cache_file.exists():
        return cache_file.read_bytes()

    query = overpass_query(boundary)
    last_error: Exception | None = None
    with _endpoint_lock(endpoint):
        for attempt in range(max_attempts):
            try:
                resp = httpx.post(endpoint, data={"data": query}, timeout=timeout_s)
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt < max_attempts - 1:
                    time.sleep(backoff_s * 2 ** attempt)
                continue
            if resp.status_code == 429:
                raise ThrottleError(f"rate limited by {endpoint}")
            if resp.status_code != 200:
                last_error = RuntimeError(f"HTTP {resp.status_code} from {endpoint}")
                if attempt < max_attempts - 1:
                    time.sleep(backoff_s * 2 ** attempt)
                continue
            cache_root.mkdir(parents=True, exist_ok=True)
            cache_file.write_bytes(resp.content)
            return resp.content
    raise TransportError(
        f"Overpass fetch failed after {max_attempts} attempts: {last_error}")
