// Thin typed wrapper over the planner-service HTTP API. All statistics on
// screen come from these payloads; the UI never computes its own.

import type {
  AnalyzeReport,
  AnalyzeRequest,
  FieldError,
  Job,
  PlanRequest,
  PresetCatalog,
  ScenarioRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errors: FieldError[],
  ) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; ") || `HTTP ${status}`);
  }
}

async function parseErrors(response: Response): Promise<FieldError[]> {
  try {
    const body = await response.json();
    if (Array.isArray(body?.errors)) return body.errors as FieldError[];
    if (typeof body?.error === "string") return [{ field: "", message: body.error }];
  } catch {
    /* non-JSON error body */
  }
  return [{ field: "", message: `HTTP ${response.status}` }];
}

export class Api {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok && response.status !== 422) {
      throw new ApiError(response.status, await parseErrors(response));
    }
    return (await response.json()) as T;
  }

  analyze(body: AnalyzeRequest): Promise<AnalyzeReport> {
    return this.request("/api/analyze", { method: "POST", body: JSON.stringify(body) });
  }

  async submitScan(scenario: ScenarioRequest): Promise<string> {
    const body = await this.request<{ job_id: string }>("/api/simulate", {
      method: "POST",
      body: JSON.stringify(scenario),
    });
    return body.job_id;
  }

  async submitPlan(plan: PlanRequest): Promise<string> {
    const body = await this.request<{ job_id: string }>("/api/plan", {
      method: "POST",
      body: JSON.stringify(plan),
    });
    return body.job_id;
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${jobId}`);
  }

  cancelJob(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${jobId}`, { method: "DELETE" });
  }

  presets(): Promise<PresetCatalog> {
    return this.request("/api/presets");
  }
}
