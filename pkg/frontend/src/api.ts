import type { Catalog, Evidence, ModelDetail, ModelSummary, Prediction } from "./types.js";

/** Error envelope every non-2xx service response carries. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the five service endpoints. The console displays
 * response fields verbatim; nothing here rounds, renames, or recomputes.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  getSchema(): Promise<Catalog> {
    return this.getJson<Catalog>("/api/schema");
  }

  listModels(): Promise<ModelSummary[]> {
    return this.getJson<ModelSummary[]>("/api/models");
  }

  getModel(id: string): Promise<ModelDetail> {
    return this.getJson<ModelDetail>(`/api/models/${encodeURIComponent(id)}`);
  }

  /** Href for the DOT download link; the graph is never rendered locally. */
  graphUrl(id: string): string {
    return `${this.baseUrl}/api/models/${encodeURIComponent(id)}/graph`;
  }

  async predict(id: string, evidence: Evidence, signal?: AbortSignal): Promise<Prediction> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/models/${encodeURIComponent(id)}/predict`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ evidence }),
        signal,
      },
    );
    return this.unwrap<Prediction>(res);
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path);
    return this.unwrap<T>(res);
  }

  private async unwrap<T>(res: Response): Promise<T> {
    const body: unknown = await res.json().catch(() => null);
    if (!res.ok) {
      const err = (body as { error?: { code?: string; detail?: string } } | null)?.error;
      throw new ApiError(res.status, err?.code ?? "error", err?.detail ?? `HTTP ${res.status}`);
    }
    return body as T;
  }
}
