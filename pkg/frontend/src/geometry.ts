/** Ring validity helpers for the polygon editor (EPSG:4326 lon/lat). */

import type { LonLat } from "./types.js";

function cross(ax: number, ay: number, bx: number, by: number): number {
  return ax * by - ay * bx;
}

/**
 * Proper segment intersection test. Touching at shared endpoints does not
 * count, so consecutive ring edges are fine; collinear overlap does count.
 */
export function segmentsCross(a: LonLat, b: LonLat, c: LonLat, d: LonLat): boolean {
  const d1 = cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]);
  const d2 = cross(b[0] - a[0], b[1] - a[1], d[0] - a[0], d[1] - a[1]);
  const d3 = cross(d[0] - c[0], d[1] - c[1], a[0] - c[0], a[1] - c[1]);
  const d4 = cross(d[0] - c[0], d[1] - c[1], b[0] - c[0], b[1] - c[1]);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  // collinear overlap (shared endpoints excluded)
  const onSegment = (p: LonLat, q: LonLat, r: LonLat): boolean =>
    Math.min(p[0], r[0]) <= q[0] && q[0] <= Math.max(p[0], r[0]) &&
    Math.min(p[1], r[1]) <= q[1] && q[1] <= Math.max(p[1], r[1]);
  const same = (p: LonLat, q: LonLat) => p[0] === q[0] && p[1] === q[1];
  if (d1 === 0 && onSegment(a, c, b) && !same(c, a) && !same(c, b)) return true;
  if (d2 === 0 && onSegment(a, d, b) && !same(d, a) && !same(d, b)) return true;
  return false;
}

/** Would appending `candidate` to the open chain cross any earlier edge? */
export function wouldSelfIntersect(chain: LonLat[], candidate: LonLat): boolean {
  if (chain.length < 2) return false;
  const last = chain[chain.length - 1];
  // the new edge shares `last` with the previous edge; check all others
  for (let i = 0; i + 2 < chain.length; i++) {
    if (segmentsCross(chain[i], chain[i + 1], last, candidate)) return true;
  }
  return false;
}

/** Does the closing edge (last -> first) cross any interior edge? */
export function closingEdgeCrosses(chain: LonLat[]): boolean {
  if (chain.length < 3) return false;
  const first = chain[0];
  const last = chain[chain.length - 1];
  for (let i = 1; i + 2 < chain.length; i++) {
    if (segmentsCross(chain[i], chain[i + 1], last, first)) return true;
  }
  return false;
}

/** Closed ring: first point repeated at the end. */
export function closeRing(chain: LonLat[]): LonLat[] {
  const [fx, fy] = chain[0];
  const [lx, ly] = chain[chain.length - 1];
  if (fx === lx && fy === ly) return [...chain];
  return [...chain, [fx, fy]];
}

export function ringToPolygon(chain: LonLat[]): {
  type: "Polygon";
  coordinates: number[][][];
} {
  return {
    type: "Polygon",
    coordinates: [closeRing(chain).map(([lon, lat]) => [lon, lat])],
  };
}
