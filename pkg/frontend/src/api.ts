// Thin client over the service's published HTTP API. The UI talks to the
// backend exclusively through this module.

export type ModelKind = "passage" | "conversation" | "question";

export interface SummarizeResponse {
  id: string;
  model: ModelKind;
  summary: string;
  created_at: string;
  truncated_input: boolean;
}

export interface HistoryItem {
  id: string;
  input: string;
  summary: string;
  created_at: string;
}

export interface HistoryResponse {
  items: HistoryItem[];
  total: number;
}

export interface ApiError {
  code: string;
  message: string;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly apiError: ApiError,
  ) {
    super(apiError.message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const err: ApiError =
        body && typeof body.code === "string"
          ? body
          : { code: "unknown", message: `HTTP ${resp.status}` };
      throw new ApiRequestError(resp.status, err);
    }
    return body as T;
  }

  summarize(model: ModelKind, text: string): Promise<SummarizeResponse> {
    return this.request<SummarizeResponse>("/api/v1/summarize", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ model, text }),
    });
  }

  history(limit = 20, offset = 0): Promise<HistoryResponse> {
    return this.request<HistoryResponse>(
      `/api/v1/history?limit=${limit}&offset=${offset}`,
    );
  }

  health(): Promise<{ status: string; store: string; backend: string }> {
    return this.request("/api/v1/health");
  }
}
