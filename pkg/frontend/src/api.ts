// Typed client for the session service. The console performs no model
// semantics of its own: every payload here is produced and interpreted
// by the server.

export interface ValidationReport {
  verdict: "Valid" | "Repaired" | "Irreparable";
  corrections: { path: string; kind: string; before: string; after: string }[];
  violations: { path: string; kind: string; message: string }[];
  semantic_errors: { kind: string; name: string; locations: string[] }[];
}

export interface AttemptReport extends ValidationReport {
  latency: number;
}

export interface GenerationResponse {
  yaml: string;
  validation: ValidationReport;
  attempts: AttemptReport[];
  succeeded_at: number;
  diff?: DocChange[];
}

export interface DocChange {
  path: string;
  kind: "Added" | "Removed" | "Changed" | "Reordered";
  before: unknown;
  after: unknown;
}

export interface BindingIssue {
  input: string;
  kind: string;
  detail: string;
}

export interface DataResponse {
  errors: BindingIssue[];
  accepted: boolean;
}

export interface SolveResponse {
  status: "Optimal" | "Infeasible" | "Unbounded" | "EarlyStop" | "Suboptimal";
  objective: number | null;
  assignment: Record<string, number> | null;
  logs: string[];
  stats: { iterations: number; nodes: number; wall_time: number };
  solver: { backend: string; origin: string } | null;
}

export interface ReportTable {
  name: string;
  variable: string;
  columns: string[];
  rows: (string | number)[][];
}

export interface HistoryEntry {
  index: number;
  query: string;
  yaml: string;
}

export interface ServiceError {
  status: number;
  kind: string;
  message: string;
  attempts?: AttemptReport[];
}

export class ApiError extends Error {
  constructor(public readonly detail: ServiceError) {
    super(`${detail.kind}: ${detail.message}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const error = (payload && payload.error) || { kind: "Unknown", message: response.statusText };
      throw new ApiError({
        status: response.status,
        kind: error.kind,
        message: error.message,
        attempts: payload ? payload.attempts : undefined,
      });
    }
    return payload as T;
  }

  createSession(): Promise<{ id: string }> {
    return this.request("POST", "/sessions");
  }

  create(sessionId: string, query: string): Promise<GenerationResponse> {
    return this.request("POST", `/sessions/${sessionId}/create`, { query });
  }

  edit(sessionId: string, query: string): Promise<GenerationResponse> {
    return this.request("POST", `/sessions/${sessionId}/edit`, { query });
  }

  putData(sessionId: string, dataset: unknown): Promise<DataResponse> {
    return this.request("PUT", `/sessions/${sessionId}/data`, dataset);
  }

  solve(sessionId: string, options: Record<string, unknown> = {}): Promise<SolveResponse> {
    return this.request("POST", `/sessions/${sessionId}/solve`, options);
  }

  report(sessionId: string): Promise<{ tables: ReportTable[] }> {
    return this.request("GET", `/sessions/${sessionId}/report`);
  }

  putReportSchema(sessionId: string, yaml: string): Promise<{ tables: string[] }> {
    return this.request("PUT", `/sessions/${sessionId}/report-schema`, { yaml });
  }

  history(sessionId: string): Promise<{ versions: HistoryEntry[] }> {
    return this.request("GET", `/sessions/${sessionId}/history`);
  }
}
