/**
 * Grid explorer: renders the service's GeoJSON layers into an SVG.
 *
 * Geometry arrives in projected meters; the view fits the feature bbox.
 * MV features sit at their true translated coordinates, which is what
 * keeps them visually apart from the LV layer. Clicking an element fills
 * the detail panel with its properties (cable or transformer parameters).
 */

import type { FeatureCollection, GeoFeature } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class MapView {
  readonly svg: SVGSVGElement;
  readonly detail: HTMLElement;
  private widthPx: number;
  private heightPx: number;
  private featureTally = 0;

  constructor(doc: Document, widthPx = 640, heightPx = 480) {
    this.widthPx = widthPx;
    this.heightPx = heightPx;
    this.svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "map-view");
    this.svg.setAttribute("width", String(widthPx));
    this.svg.setAttribute("height", String(heightPx));
    this.detail = doc.createElement("pre");
    this.detail.className = "feature-detail";
  }

  get featureCount(): number {
    return this.featureTally;
  }

  render(collection: FeatureCollection): void {
    const doc = this.svg.ownerDocument!;
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    this.featureTally = 0;

    const xs: number[] = [];
    const ys: number[] = [];
    for (const f of collection.features) {
      for (const [x, y] of coordsOf(f)) {
        xs.push(x);
        ys.push(y);
      }
    }
    if (xs.length === 0) return;
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const spanX = Math.max(maxX - minX, 1e-9);
    const spanY = Math.max(maxY - minY, 1e-9);
    const scale = Math.min((this.widthPx - 20) / spanX,
                           (this.heightPx - 20) / spanY);
    const toPx = ([x, y]: [number, number]): [number, number] => [
      10 + (x - minX) * scale,
      this.heightPx - 10 - (y - minY) * scale,
    ];

    // lines beneath point markers
    const ordered = [...collection.features].sort((a, b) =>
      Number(b.geometry.type === "LineString")
      - Number(a.geometry.type === "LineString"));
    for (const feature of ordered) {
      const el = this.renderFeature(doc, feature, toPx);
      if (el !== null) {
        this.svg.appendChild(el);
        this.featureTally += 1;
      }
    }
  }

  private renderFeature(
    doc: Document, feature: GeoFeature,
    toPx: (p: [number, number]) => [number, number],
  ): SVGElement | null {
    const props = feature.properties;
    let el: SVGElement;
    if (feature.geometry.type === "LineString") {
      el = doc.createElementNS(SVG_NS, "polyline");
      const pts = (feature.geometry.coordinates as [number, number][])
        .map((p) => toPx(p).join(",")).join(" ");
      el.setAttribute("points", pts);
      el.setAttribute("class",
        `feature line level-${props.level ?? "unknown"} kind-${props.kind}`);
    } else if (feature.geometry.type === "Point") {
      el = doc.createElementNS(SVG_NS, "circle");
      const [cx, cy] = toPx(feature.geometry.coordinates as [number, number]);
      el.setAttribute("cx", String(cx));
      el.setAttribute("cy", String(cy));
      el.setAttribute("r", props.kind === "transformer" ? "5" : "2.5");
      el.setAttribute("class",
        `feature point level-${props.level ?? ""} kind-${props.kind}`);
    } else {
      return null;
    }
    el.setAttribute("data-id", String(props.id ?? ""));
    el.addEventListener("click", (ev) => {
      ev.stopPropagation();
      this.showDetail(feature);
    });
    return el;
  }

  /** Detail popup content is verbatim artifact data, never recomputed. */
  showDetail(feature: GeoFeature): void {
    this.detail.textContent = JSON.stringify(feature.properties, null, 1);
  }
}

function coordsOf(feature: GeoFeature): [number, number][] {
  if (feature.geometry.type === "Point") {
    return [feature.geometry.coordinates as [number, number]];
  }
  if (feature.geometry.type === "LineString") {
    return feature.geometry.coordinates as [number, number][];
  }
  return [];
}
