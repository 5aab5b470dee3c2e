/** Parameter form model; validation mirrors the server schema bounds. */

import type { GenerationParams } from "./types.js";

export const DEFAULT_PARAMS: GenerationParams = {
  crs_code: 32632,
  radius_m: 400.0,
  lv_kv: 0.4,
  mv_kv: 16.0,
  hv_kv: 110.0,
  m2_per_customer: 50.0,
  pv_penetration: 0.1,
  s_r_kva: 5.0,
  cod: 1.25,
  typical_drop_pct_per_km: 5.0,
  seed: 0,
};

export interface FieldError {
  field: keyof GenerationParams;
  message: string;
}

export function validateParams(p: GenerationParams): FieldError[] {
  const errors: FieldError[] = [];
  const positive: (keyof GenerationParams)[] = [
    "radius_m", "lv_kv", "mv_kv", "hv_kv", "m2_per_customer", "s_r_kva",
    "typical_drop_pct_per_km",
  ];
  for (const field of positive) {
    if (!(Number(p[field]) > 0)) errors.push({ field, message: "must be positive" });
  }
  if (!(p.pv_penetration >= 0 && p.pv_penetration <= 1)) {
    errors.push({ field: "pv_penetration", message: "must be within [0, 1]" });
  }
  if (!(p.cod >= 1)) errors.push({ field: "cod", message: "must be >= 1" });
  if (!Number.isInteger(p.crs_code)) {
    errors.push({ field: "crs_code", message: "must be an EPSG integer" });
  }
  if (!(p.lv_kv < p.mv_kv && p.mv_kv < p.hv_kv)) {
    errors.push({ field: "mv_kv", message: "levels must satisfy lv < mv < hv" });
  }
  if (!Number.isInteger(p.seed)) {
    errors.push({ field: "seed", message: "must be an integer" });
  }
  return errors;
}

/** Worked example shown under the customers-per-area field. */
export function consumersHint(m2PerCustomer: number, exampleAreaM2 = 300): string {
  if (!(m2PerCustomer > 0)) return "";
  const consumers = Math.max(1, Math.floor(exampleAreaM2 / m2PerCustomer));
  return `${exampleAreaM2} m² → ${consumers} consumers`;
}
