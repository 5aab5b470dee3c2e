"""Planar geometry primitives shared by the map and grid-synthesis stages.

All coordinates are meters in a projected CRS. Points are (x, y) tuples;
``GeoPoint`` is a named alias so model code can say ``p.x`` / ``p.y``.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence


class GeoPoint(NamedTuple):
    x: float
    y: float


Point = tuple[float, float]


def dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def polyline_length(points: Sequence[Point]) -> float:
    """Euclidean arc length of an ordered point sequence."""
    return sum(dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def shoelace_area(ring: Sequence[Point]) -> float:
    """Unsigned area of a closed ring (first point may repeat at the end).

    Evaluated relative to the first vertex: projected coordinates are in
    the 1e6 m range and the raw cross products would cost ~1e-4 m2 of
    cancellation error.
    """
    pts = list(ring)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    rx, ry = pts[0]
    s = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i][0] - rx, pts[i][1] - ry
        x1, y1 = pts[(i + 1) % len(pts)][0] - rx, pts[(i + 1) % len(pts)][1] - ry
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def ring_centroid(ring: Sequence[Point]) -> Point:
    """Area-weighted centroid of a closed ring."""
    pts = list(ring)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    rx, ry = pts[0]
    a2 = 0.0  # twice the signed area
    cx = cy = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i][0] - rx, pts[i][1] - ry
        x1, y1 = pts[(i + 1) % len(pts)][0] - rx, pts[(i + 1) % len(pts)][1] - ry
        cross = x0 * y1 - x1 * y0
        a2 += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if abs(a2) < 1e-12:  # degenerate ring: fall back to vertex mean
        n = len(pts)
        return (sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n)
    return (rx + cx / (3.0 * a2), ry + cy / (3.0 * a2))


def project_point_to_segment(p: Point, a: Point, b: Point) -> tuple[Point, float, float]:
    """Nearest point to ``p`` on segment a-b.

    Returns (foot point, parameter t in [0, 1], distance).
    """
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return a, 0.0, dist(p, a)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / seg2
    t = min(1.0, max(0.0, t))
    foot = (ax + t * dx, ay + t * dy)
    return foot, t, dist(p, foot)


def nearest_point_on_polyline(p: Point, polyline: Sequence[Point]) -> tuple[Point, int, float, float]:
    """Nearest point to ``p`` over all segments of a polyline.

    Returns (foot point, segment index, parameter t on that segment, distance).
    Ties keep the earliest segment, so callers get a stable pick.
    """
    best = None
    for i in range(len(polyline) - 1):
        foot, t, d = project_point_to_segment(p, polyline[i], polyline[i + 1])
        if best is None or d < best[3] - 1e-12:
            best = (foot, i, t, d)
    assert best is not None, "polyline needs at least 2 points"
    return best


def segment_intersection(a: Point, b: Point, c: Point, d: Point,
                         tol: float = 1e-9) -> Point | None:
    """Intersection point of segments a-b and c-d, or None.

    Collinear overlaps return None (handled upstream by shared endpoints);
    endpoint touches within ``tol`` count as intersections.
    """
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-15:
        return None
    qp = (c[0] - a[0], c[1] - a[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    rlen = math.hypot(*r)
    slen = math.hypot(*s)
    t_tol = tol / rlen if rlen > 0 else 0.0
    u_tol = tol / slen if slen > 0 else 0.0
    if -t_tol <= t <= 1.0 + t_tol and -u_tol <= u <= 1.0 + u_tol:
        return (a[0] + t * r[0], a[1] + t * r[1])
    return None


def bbox(points: Sequence[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), min(ys), max(xs), max(ys)
