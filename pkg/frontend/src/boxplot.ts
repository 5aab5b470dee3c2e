/** SVG box plot drawn from a raw value array (quartiles computed here,
 * in the client, by linear interpolation; see stats.ts). */

import { boxSummary } from "./stats.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderBoxPlot(doc: Document, title: string, values: number[],
                              widthPx = 360, heightPx = 120): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("class", "box-plot");
  svg.setAttribute("width", String(widthPx));
  svg.setAttribute("height", String(heightPx));
  svg.setAttribute("data-title", title);
  if (values.length === 0) return svg;

  const s = boxSummary(values);
  svg.setAttribute("data-min", String(s.min));
  svg.setAttribute("data-q1", String(s.q1));
  svg.setAttribute("data-median", String(s.median));
  svg.setAttribute("data-q3", String(s.q3));
  svg.setAttribute("data-max", String(s.max));

  const lo = Math.min(s.min, s.whiskerLow);
  const hi = Math.max(s.max, s.whiskerHigh);
  const span = Math.max(hi - lo, 1e-12);
  const x = (v: number) => 10 + ((v - lo) / span) * (widthPx - 20);
  const midY = heightPx / 2;
  const boxTop = midY - 22;
  const boxBottom = midY + 22;

  const line = (x1: number, y1: number, x2: number, y2: number, cls: string) => {
    const el = doc.createElementNS(SVG_NS, "line");
    el.setAttribute("x1", String(x1));
    el.setAttribute("y1", String(y1));
    el.setAttribute("x2", String(x2));
    el.setAttribute("y2", String(y2));
    el.setAttribute("class", cls);
    svg.appendChild(el);
  };

  line(x(s.whiskerLow), midY, x(s.q1), midY, "whisker");
  line(x(s.q3), midY, x(s.whiskerHigh), midY, "whisker");
  line(x(s.whiskerLow), boxTop + 10, x(s.whiskerLow), boxBottom - 10, "whisker-cap");
  line(x(s.whiskerHigh), boxTop + 10, x(s.whiskerHigh), boxBottom - 10, "whisker-cap");

  const box = doc.createElementNS(SVG_NS, "rect");
  box.setAttribute("x", String(x(s.q1)));
  box.setAttribute("y", String(boxTop));
  box.setAttribute("width", String(Math.max(x(s.q3) - x(s.q1), 0.5)));
  box.setAttribute("height", String(boxBottom - boxTop));
  box.setAttribute("class", "iqr-box");
  svg.appendChild(box);

  line(x(s.median), boxTop, x(s.median), boxBottom, "median");

  for (const v of s.outliers) {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x(v)));
    dot.setAttribute("cy", String(midY));
    dot.setAttribute("r", "2");
    dot.setAttribute("class", "outlier");
    svg.appendChild(dot);
  }

  const label = doc.createElementNS(SVG_NS, "text");
  label.setAttribute("x", "10");
  label.setAttribute("y", "14");
  label.textContent = title;
  svg.appendChild(label);
  return svg;
}
