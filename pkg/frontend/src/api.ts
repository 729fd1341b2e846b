import type { AskRequest, AskResponse, HealthResponse } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(status: number, code: string, detail: string) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

export interface ApiClient {
  ask(request: AskRequest): Promise<AskResponse>;
  health(): Promise<HealthResponse>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorFromResponse(response: Response): Promise<ApiError> {
  let code = `HTTP${response.status}`;
  let detail = response.statusText || "request failed";
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    if (body.error) code = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the HTTP status fallback
  }
  return new ApiError(response.status, code, detail);
}

export function createClient(baseUrl = "", fetchFn: FetchLike = fetch): ApiClient {
  const post = async <T>(path: string, payload: unknown): Promise<T> => {
    let response: Response;
    try {
      response = await fetchFn(`${baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new ApiError(0, "NetworkError", err instanceof Error ? err.message : String(err));
    }
    if (!response.ok) {
      throw await errorFromResponse(response);
    }
    return (await response.json()) as T;
  };

  return {
    ask: (request) => post<AskResponse>("/api/ask", request),
    health: async () => {
      let response: Response;
      try {
        response = await fetchFn(`${baseUrl}/api/health`);
      } catch (err) {
        throw new ApiError(0, "NetworkError", err instanceof Error ? err.message : String(err));
      }
      if (!response.ok) {
        throw await errorFromResponse(response);
      }
      return (await response.json()) as HealthResponse;
    },
  };
}
