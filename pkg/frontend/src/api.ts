/** Thin fetch client for the session API. No label logic lives here: every
 * number shown in the UI is passed through verbatim from these responses. */

import type {
  ApiErrorCode,
  CreateSessionRequest,
  EvaluationReport,
  HistoryResponse,
  IterateResponse,
  PromptResponse,
  SessionSummary,
  Submission,
} from "./types.js";

export class ApiError extends Error {
  readonly code: ApiErrorCode;
  readonly status: number;
  readonly detail: unknown;

  constructor(code: ApiErrorCode, message: string, status: number, detail: unknown = null) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ApiError("transport", `service unreachable: ${String(cause)}`, 0);
    }
    if (!response.ok) {
      let code: ApiErrorCode = "transport";
      let message = `request failed with status ${response.status}`;
      let detail: unknown = null;
      try {
        const payload = (await response.json()) as {
          code?: ApiErrorCode;
          message?: string;
          detail?: unknown;
        };
        if (payload.code) code = payload.code;
        if (payload.message) message = payload.message;
        detail = payload.detail ?? null;
      } catch {
        // non-JSON error body; keep the status-based message
      }
      throw new ApiError(code, message, response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions", body);
  }

  summary(sessionId: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${sessionId}/summary`);
  }

  iterate(sessionId: string): Promise<IterateResponse> {
    return this.request("POST", `/sessions/${sessionId}/iterate`);
  }

  submitAnnotations(sessionId: string, submissions: Submission[]): Promise<SessionSummary> {
    return this.request("POST", `/sessions/${sessionId}/annotations`, { submissions });
  }

  evaluate(sessionId: string): Promise<EvaluationReport> {
    return this.request("POST", `/sessions/${sessionId}/evaluate`);
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return this.request("GET", `/sessions/${sessionId}/history`);
  }

  prompt(sessionId: string): Promise<PromptResponse> {
    return this.request("GET", `/sessions/${sessionId}/prompt`);
  }
}
