/**
 * Operator console: draw the boundary, set parameters, submit, watch the
 * job, explore the result. All numbers shown come from service artifacts;
 * the client computes presentation statistics (box-plot quartiles) only.
 */

import { ApiError, SyngridApi } from "./api.js";
import { renderBoxPlot } from "./boxplot.js";
import { MapView } from "./map-view.js";
import { DEFAULT_PARAMS, consumersHint, validateParams } from "./params.js";
import { PolygonEditor } from "./polygon-editor.js";
import type {
  Analysis, AppConfig, GenerationParams, JobStatus,
} from "./types.js";

const NUMERIC_FIELDS: (keyof GenerationParams)[] = [
  "crs_code", "radius_m", "lv_kv", "mv_kv", "hv_kv", "m2_per_customer",
  "pv_penetration", "s_r_kva", "cod", "typical_drop_pct_per_km", "seed",
];

export class App {
  readonly api: SyngridApi;
  readonly editor: PolygonEditor;
  readonly map: MapView;
  readonly root: HTMLElement;
  private doc: Document;
  private inputs = new Map<keyof GenerationParams, HTMLInputElement>();
  private osmField: HTMLTextAreaElement;
  private submitButton: HTMLButtonElement;
  private statusBanner: HTMLElement;
  private analysisPanel: HTMLElement;
  private hintEl: HTMLElement;
  private pollIntervalMs: number;
  jobId: string | null = null;
  lastStatus: JobStatus | null = null;
  lastAnalysis: Analysis | null = null;

  constructor(root: HTMLElement, config: AppConfig,
              fetchFn?: (url: string, init?: RequestInit) => Promise<Response>) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.api = new SyngridApi(config.apiBaseUrl, fetchFn);
    this.pollIntervalMs = config.pollIntervalMs ?? 2000;

    this.editor = new PolygonEditor(this.doc, 480, 360,
      config.view ?? { lonMin: 5.5, lonMax: 10.5, latMin: 45.5, latMax: 48.0 },
      config.tileUrl);
    this.map = new MapView(this.doc);

    const editorSection = this.section("boundary", "Boundary polygon");
    editorSection.appendChild(this.editor.svg);
    const closeButton = this.doc.createElement("button");
    closeButton.textContent = "Close polygon";
    closeButton.className = "close-polygon";
    closeButton.addEventListener("click", () => this.editor.close());
    editorSection.appendChild(closeButton);

    const form = this.section("parameters", "Generation parameters");
    for (const field of NUMERIC_FIELDS) {
      const label = this.doc.createElement("label");
      label.textContent = field;
      const input = this.doc.createElement("input");
      input.name = field;
      input.value = String(DEFAULT_PARAMS[field]);
      input.addEventListener("input", () => this.refreshHint());
      label.appendChild(input);
      form.appendChild(label);
      this.inputs.set(field, input);
    }
    this.hintEl = this.doc.createElement("small");
    this.hintEl.className = "consumers-hint";
    form.appendChild(this.hintEl);
    this.refreshHint();

    const osmLabel = this.doc.createElement("label");
    osmLabel.textContent = "OSM XML (optional, offline use)";
    this.osmField = this.doc.createElement("textarea");
    this.osmField.className = "osm-xml";
    osmLabel.appendChild(this.osmField);
    form.appendChild(osmLabel);

    this.submitButton = this.doc.createElement("button");
    this.submitButton.textContent = "Generate";
    this.submitButton.className = "submit-job";
    this.submitButton.disabled = true;
    this.submitButton.addEventListener("click", () => {
      void this.submit();
    });
    form.appendChild(this.submitButton);

    this.statusBanner = this.doc.createElement("div");
    this.statusBanner.className = "status-banner";
    root.appendChild(this.statusBanner);

    const mapSection = this.section("explorer", "Grid explorer");
    mapSection.appendChild(this.map.svg);
    mapSection.appendChild(this.map.detail);
    this.analysisPanel = this.section("analysis", "Analysis");

    this.editor.onChange = () => {
      this.submitButton.disabled = this.editor.ring() === null;
    };
  }

  private section(cls: string, title: string): HTMLElement {
    const el = this.doc.createElement("section");
    el.className = cls;
    const h = this.doc.createElement("h2");
    h.textContent = title;
    el.appendChild(h);
    this.root.appendChild(el);
    return el;
  }

  private refreshHint(): void {
    const m2 = Number(this.inputs.get("m2_per_customer")?.value);
    this.hintEl.textContent = consumersHint(m2);
  }

  params(): GenerationParams {
    const p = { ...DEFAULT_PARAMS };
    for (const field of NUMERIC_FIELDS) {
      (p as Record<string, number>)[field] =
        Number(this.inputs.get(field)!.value);
    }
    return p;
  }

  markInvalid(field: string, message: string): void {
    const key = field.replace(/^params\./, "") as keyof GenerationParams;
    const input = this.inputs.get(key);
    if (input) {
      input.setAttribute("data-invalid", "true");
      input.title = message;
    }
    this.banner(`invalid ${key}: ${message}`, "error");
  }

  private clearInvalid(): void {
    for (const input of this.inputs.values()) {
      input.removeAttribute("data-invalid");
      input.title = "";
    }
  }

  private banner(text: string, cls = ""): void {
    this.statusBanner.textContent = text;
    this.statusBanner.setAttribute("data-state", cls);
  }

  /** Submit the drawn boundary with the form parameters; resolves when
   * the job reaches a final state (artifacts rendered on success). */
  async submit(): Promise<JobStatus | null> {
    this.clearInvalid();
    const boundary = this.editor.boundary();
    if (boundary === null) {
      this.banner("draw and close a boundary polygon first", "error");
      return null;
    }
    const params = this.params();
    const errors = validateParams(params);
    if (errors.length > 0) {
      for (const e of errors) this.markInvalid(e.field, e.message);
      return null;
    }
    const body = {
      params,
      boundary,
      ...(this.osmField.value.trim()
        ? { osm_xml: this.osmField.value }
        : {}),
    };
    try {
      this.jobId = await this.api.submitJob(body);
    } catch (err) {
      if (err instanceof ApiError && err.field) {
        this.markInvalid(err.field, err.message);
      } else {
        this.banner(`submission failed: ${(err as Error).message}`, "error");
      }
      return null;
    }
    this.banner(`job ${this.jobId} queued`);
    return await this.poll();
  }

  /** Poll the job with gentle backoff until it settles. */
  private async poll(): Promise<JobStatus> {
    let wait = this.pollIntervalMs;
    for (;;) {
      const status = await this.api.jobStatus(this.jobId!);
      this.lastStatus = status;
      this.banner(`job ${this.jobId}: ${status.status}`, status.status);
      if (status.status === "done") {
        await this.showResult();
        return status;
      }
      if (status.status === "failed") {
        this.banner(`job failed: ${status.error ?? "unknown error"}`, "error");
        return status;
      }
      await new Promise((resolve) => setTimeout(resolve, wait));
      wait = Math.min(wait * 1.5, 10_000);
    }
  }

  private async showResult(): Promise<void> {
    const collection = await this.api.geojson(this.jobId!);
    this.map.render(collection);
    const analysis = await this.api.analysis(this.jobId!);
    this.lastAnalysis = analysis;
    this.renderAnalysis(analysis);
  }

  renderedFeatureCount(): number {
    return this.map.featureCount;
  }

  private renderAnalysis(analysis: Analysis): void {
    const doc = this.doc;
    while (this.analysisPanel.childNodes.length > 1) {
      this.analysisPanel.removeChild(this.analysisPanel.lastChild!);
    }
    const flow = analysis.power_flow;
    const summary = doc.createElement("p");
    summary.className = "flow-summary";
    summary.textContent =
      `power flow ${flow.converged ? "converged" : "DID NOT CONVERGE"} in `
      + `${flow.iterations} iterations; load ${flow.total_load_mw.toFixed(3)} MW, `
      + `losses ${flow.total_loss_mw.toFixed(3)} MW`;
    this.analysisPanel.appendChild(summary);

    this.analysisPanel.appendChild(renderBoxPlot(
      doc, "Bus voltage magnitude [pu]",
      Object.values(flow.bus_vm_pu)));
    this.analysisPanel.appendChild(renderBoxPlot(
      doc, "Line loading [%]",
      Object.values(flow.line_loading_pct)));

    const table = doc.createElement("table");
    table.className = "short-circuit";
    const head = doc.createElement("tr");
    for (const caption of ["BusID", "Subgrid grounding",
                           "Minimum current [kA]", "Maximum peak current [kA]"]) {
      const th = doc.createElement("th");
      th.textContent = caption;
      head.appendChild(th);
    }
    table.appendChild(head);
    for (const row of analysis.short_circuit.rows.slice(0, 10)) {
      const tr = doc.createElement("tr");
      for (const value of [row.bus, row.grounding,
                           row.ik_min_ka.toFixed(3), row.ip_ka.toFixed(3)]) {
        const td = doc.createElement("td");
        td.textContent = value;
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }
    this.analysisPanel.appendChild(table);
  }
}
