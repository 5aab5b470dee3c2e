/** Typed client for the documented job-service endpoints. */

import type {
  Analysis, FeatureCollection, JobStatus, JobSubmission,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  field?: string;

  constructor(status: number, message: string, field?: string) {
    super(message);
    this.status = status;
    this.field = field;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class SyngridApi {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async checked(resp: Response): Promise<Response> {
    if (resp.ok) return resp;
    let message = `HTTP ${resp.status}`;
    let field: string | undefined;
    try {
      const doc = await resp.json();
      message = doc.error ?? message;
      field = doc.field;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, message, field);
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(`${this.baseUrl}/healthz`);
      return resp.ok;
    } catch {
      return false;
    }
  }

  async submitJob(body: JobSubmission): Promise<string> {
    const resp = await this.checked(await this.fetchFn(`${this.baseUrl}/jobs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }));
    const doc = await resp.json();
    return doc.job_id as string;
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/jobs/${jobId}`));
    return (await resp.json()) as JobStatus;
  }

  async geojson(jobId: string): Promise<FeatureCollection> {
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/jobs/${jobId}/geojson`));
    return (await resp.json()) as FeatureCollection;
  }

  async analysis(jobId: string): Promise<Analysis> {
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/jobs/${jobId}/analysis`));
    return (await resp.json()) as Analysis;
  }
}
