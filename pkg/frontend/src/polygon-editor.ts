/**
 * Click-to-draw boundary polygon editor.
 *
 * Renders on a plain SVG canvas with a graticule (the offline fallback
 * when no tile server is reachable; with a tile URL configured the tiles
 * sit underneath as a background image layer). Clicks append vertices;
 * a vertex whose new edge would cross an existing edge is rejected with
 * a visual cue. Closing needs at least 3 vertices and a non-crossing
 * closing edge, and emits a closed GeoJSON ring.
 */

import { closingEdgeCrosses, ringToPolygon, wouldSelfIntersect } from "./geometry.js";
import type { GeoJsonPolygon, LonLat } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface EditorView {
  lonMin: number;
  lonMax: number;
  latMin: number;
  latMax: number;
}

export class PolygonEditor {
  readonly svg: SVGSVGElement;
  readonly widthPx: number;
  readonly heightPx: number;
  view: EditorView;
  vertices: LonLat[] = [];
  closed = false;
  onChange: (() => void) | null = null;

  constructor(doc: Document, widthPx = 480, heightPx = 360,
              view: EditorView = { lonMin: -1, lonMax: 1, latMin: -1, latMax: 1 },
              tileUrl?: string) {
    this.widthPx = widthPx;
    this.heightPx = heightPx;
    this.view = view;
    this.svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "polygon-editor");
    this.svg.setAttribute("width", String(widthPx));
    this.svg.setAttribute("height", String(heightPx));
    if (tileUrl) {
      const img = doc.createElementNS(SVG_NS, "image");
      img.setAttribute("href", tileUrl);
      img.setAttribute("width", String(widthPx));
      img.setAttribute("height", String(heightPx));
      this.svg.appendChild(img);
    } else {
      this.drawGraticule(doc);
    }
    this.svg.addEventListener("click", (ev) => {
      const rect = this.svg.getBoundingClientRect();
      const e = ev as MouseEvent;
      this.clickAt(e.clientX - rect.left, e.clientY - rect.top);
    });
  }

  private drawGraticule(doc: Document): void {
    const g = doc.createElementNS(SVG_NS, "g");
    g.setAttribute("class", "graticule");
    for (let i = 0; i <= 10; i++) {
      const v = doc.createElementNS(SVG_NS, "line");
      const x = (i * this.widthPx) / 10;
      v.setAttribute("x1", String(x));
      v.setAttribute("x2", String(x));
      v.setAttribute("y1", "0");
      v.setAttribute("y2", String(this.heightPx));
      g.appendChild(v);
      const h = doc.createElementNS(SVG_NS, "line");
      const y = (i * this.heightPx) / 10;
      h.setAttribute("x1", "0");
      h.setAttribute("x2", String(this.widthPx));
      h.setAttribute("y1", String(y));
      h.setAttribute("y2", String(y));
      g.appendChild(h);
    }
    this.svg.appendChild(g);
  }

  lonLatOf(px: number, py: number): LonLat {
    const { lonMin, lonMax, latMin, latMax } = this.view;
    const lon = lonMin + (px / this.widthPx) * (lonMax - lonMin);
    const lat = latMax - (py / this.heightPx) * (latMax - latMin);
    return [lon, lat];
  }

  pixelOf(p: LonLat): [number, number] {
    const { lonMin, lonMax, latMin, latMax } = this.view;
    return [
      ((p[0] - lonMin) / (lonMax - lonMin)) * this.widthPx,
      ((latMax - p[1]) / (latMax - latMin)) * this.heightPx,
    ];
  }

  /** Editor click in pixel coordinates; returns whether a vertex landed. */
  clickAt(px: number, py: number): boolean {
    if (this.closed) return false;
    return this.addVertex(this.lonLatOf(px, py));
  }

  addVertex(p: LonLat): boolean {
    if (this.closed) return false;
    if (wouldSelfIntersect(this.vertices, p)) {
      this.flagInvalid();
      return false;
    }
    this.vertices.push(p);
    this.render();
    this.onChange?.();
    return true;
  }

  /** Close the ring; refuses with a cue when invalid. */
  close(): boolean {
    if (this.closed) return true;
    if (this.vertices.length < 3 || closingEdgeCrosses(this.vertices)) {
      this.flagInvalid();
      return false;
    }
    this.closed = true;
    this.render();
    this.onChange?.();
    return true;
  }

  reset(): void {
    this.vertices = [];
    this.closed = false;
    this.render();
    this.onChange?.();
  }

  /** Closed lon/lat ring (first point repeated), or null while invalid. */
  ring(): LonLat[] | null {
    if (!this.closed) return null;
    return [...this.vertices, [...this.vertices[0]] as LonLat];
  }

  boundary(): GeoJsonPolygon | null {
    if (!this.closed) return null;
    return ringToPolygon(this.vertices);
  }

  get canClose(): boolean {
    return this.vertices.length >= 3 && !closingEdgeCrosses(this.vertices);
  }

  private flagInvalid(): void {
    this.svg.setAttribute("data-invalid", "true");
  }

  private render(): void {
    this.svg.removeAttribute("data-invalid");
    const doc = this.svg.ownerDocument!;
    this.svg.querySelector(".draft")?.remove();
    const g = doc.createElementNS(SVG_NS, "g");
    g.setAttribute("class", "draft");
    if (this.vertices.length >= 2) {
      const shape = doc.createElementNS(
        SVG_NS, this.closed ? "polygon" : "polyline");
      shape.setAttribute("points", this.vertices
        .map((v) => this.pixelOf(v).join(",")).join(" "));
      shape.setAttribute("class", "boundary");
      g.appendChild(shape);
    }
    for (const v of this.vertices) {
      const [x, y] = this.pixelOf(v);
      const c = doc.createElementNS(SVG_NS, "circle");
      c.setAttribute("cx", String(x));
      c.setAttribute("cy", String(y));
      c.setAttribute("r", "3");
      c.setAttribute("class", "vertex");
      g.appendChild(c);
    }
    this.svg.appendChild(g);
  }
}
