/** Payload shapes of the grid-generation service API. */

export interface GenerationParams {
  crs_code: number;
  radius_m: number;
  lv_kv: number;
  mv_kv: number;
  hv_kv: number;
  m2_per_customer: number;
  pv_penetration: number;
  s_r_kva: number;
  cod: number;
  typical_drop_pct_per_km: number;
  seed: number;
}

export type LonLat = [number, number];

export interface GeoJsonPolygon {
  type: "Polygon";
  coordinates: number[][][];
}

export interface JobSubmission {
  params: GenerationParams;
  boundary: GeoJsonPolygon;
  osm_xml?: string;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobStatus {
  status: JobState;
  report?: Record<string, unknown>;
  error?: string;
}

export interface GeoFeature {
  type: "Feature";
  geometry: { type: string; coordinates: unknown };
  properties: Record<string, unknown>;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: GeoFeature[];
}

export interface PowerFlowReport {
  converged: boolean;
  iterations: number;
  bus_vm_pu: Record<string, number>;
  line_loading_pct: Record<string, number>;
  levels: Record<string, Record<string, number>>;
  total_load_mw: number;
  total_gen_mw: number;
  total_loss_mw: number;
}

export interface FaultRow {
  bus: string;
  grounding: string;
  ik_min_ka: number;
  ikss_max_ka: number;
  ip_ka: number;
}

export interface Analysis {
  power_flow: PowerFlowReport;
  short_circuit: { rows: FaultRow[] };
  metrics: {
    customers_per_km: number;
    lv_grid_count: number;
    avg_lv_diameter_km: number;
  };
}

export interface AppConfig {
  apiBaseUrl: string;
  tileUrl?: string;
  pollIntervalMs?: number;
  view?: { lonMin: number; lonMax: number; latMin: number; latMax: number };
}
