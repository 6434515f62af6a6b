// Thin typed client over the pipeline HTTP API.
//
// Every console mutation goes through exactly one of the POST helpers here
// and nothing else touches the server, which is what makes the 1:1
// mutation-to-endpoint audit in the tests possible.

import type {
  CategoryRow,
  CreateRunRequest,
  GateState,
  MatchRow,
  RankingResponse,
  Report,
  RunInfo,
  RunSummary,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        if (body && typeof body.detail === "string") detail = body.detail;
        else detail = JSON.stringify(body);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request("/api/runs");
  }

  createRun(body: CreateRunRequest): Promise<RunInfo> {
    return this.post("/api/runs", body);
  }

  getRun(runId: string): Promise<RunInfo> {
    return this.request(`/api/runs/${runId}`);
  }

  getCategories(runId: string, profile?: string): Promise<CategoryRow[]> {
    const qs = profile ? `?profile=${encodeURIComponent(profile)}` : "";
    return this.request(`/api/runs/${runId}/categories${qs}`);
  }

  postSelection(runId: string, categories: string[], profile?: string | null): Promise<RunInfo> {
    return this.post(`/api/runs/${runId}/selection`, { categories, profile: profile ?? null });
  }

  getRanking(runId: string, profile?: string): Promise<RankingResponse> {
    const qs = profile ? `?profile=${encodeURIComponent(profile)}` : "";
    return this.request(`/api/runs/${runId}/ranking${qs}`);
  }

  getMatches(runId: string): Promise<MatchRow[]> {
    return this.request(`/api/runs/${runId}/matches`);
  }

  getReports(runId: string): Promise<Report[]> {
    return this.request(`/api/runs/${runId}/reports`);
  }

  getGate(runId: string, gateId: string): Promise<GateState> {
    return this.request(`/api/runs/${runId}/gates/${gateId}`);
  }

  postGateReview(
    runId: string,
    gateId: string,
    action: "Approved" | "Rejected" | "Amended",
    verdicts: Verdict[],
    reviewer: string,
    version: number,
  ): Promise<RunInfo> {
    return this.post(`/api/runs/${runId}/gates/${gateId}`, {
      action,
      reviewer,
      version,
      verdicts,
    });
  }
}
