// View-model for the console: one session, an append-only timeline
// mirroring the server history, and the latest panel states. All state
// transitions go through the service; nothing is computed locally.

import {
  ApiError,
  BindingIssue,
  DocChange,
  GenerationResponse,
  HistoryEntry,
  ReportTable,
  ServiceClient,
  SolveResponse,
  ValidationReport,
} from "./api.js";

export interface TimelineEntry {
  index: number;
  query: string;
  yaml: string;
  diff: DocChange[];
}

export interface SessionView {
  sessionId: string | null;
  yaml: string;
  validation: ValidationReport | null;
  timeline: TimelineEntry[];
  contractIssues: BindingIssue[];
  dataAccepted: boolean;
  outcome: SolveResponse | null;
  previousObjective: number | null;
  objectiveDelta: number | null;
  report: ReportTable[] | null;
  lastDiff: DocChange[];
  error: string | null;
  failedAttempts: number;
}

export function emptyView(): SessionView {
  return {
    sessionId: null,
    yaml: "",
    validation: null,
    timeline: [],
    contractIssues: [],
    dataAccepted: false,
    outcome: null,
    previousObjective: null,
    objectiveDelta: null,
    report: null,
    lastDiff: [],
    error: null,
    failedAttempts: 0,
  };
}

export class ConsoleSession {
  readonly view: SessionView = emptyView();
  private pending = false;

  constructor(private readonly client: ServiceClient) {}

  get busy(): boolean {
    return this.pending;
  }

  // one in-flight mutating request per session, mirroring the server's
  // per-session serialization
  private async exclusive<T>(work: () => Promise<T>): Promise<T> {
    if (this.pending) {
      throw new Error("another request is in flight for this session");
    }
    this.pending = true;
    try {
      return await work();
    } finally {
      this.pending = false;
    }
  }

  async start(): Promise<void> {
    await this.exclusive(async () => {
      const { id } = await this.client.createSession();
      this.view.sessionId = id;
    });
  }

  async createFlow(query: string): Promise<void> {
    await this.exclusive(async () => {
      this.view.error = null;
      try {
        const response = await this.client.create(this.requireSession(), query);
        this.applyGeneration(query, response);
      } catch (error) {
        this.captureError(error);
        throw error;
      }
    });
  }

  async editFlow(query: string): Promise<void> {
    await this.exclusive(async () => {
      this.view.error = null;
      try {
        const response = await this.client.edit(this.requireSession(), query);
        this.applyGeneration(query, response);
      } catch (error) {
        this.captureError(error);
        throw error;
      }
    });
  }

  async solveFlow(dataset: unknown | null): Promise<void> {
    await this.exclusive(async () => {
      this.view.error = null;
      const sessionId = this.requireSession();
      try {
        if (dataset !== null) {
          const check = await this.client.putData(sessionId, dataset);
          this.view.contractIssues = check.errors;
          this.view.dataAccepted = check.accepted;
          if (!check.accepted) {
            return;
          }
        }
        const previous = this.view.outcome;
        const outcome = await this.client.solve(sessionId);
        this.view.previousObjective = previous ? previous.objective : null;
        this.view.outcome = outcome;
        this.view.objectiveDelta =
          previous && previous.objective !== null && outcome.objective !== null
            ? outcome.objective - previous.objective
            : null;
        if (outcome.assignment !== null) {
          const report = await this.client.report(sessionId);
          this.view.report = report.tables;
        } else {
          this.view.report = null;
        }
      } catch (error) {
        this.captureError(error);
        throw error;
      }
    });
  }

  async attachReportSchema(yaml: string): Promise<void> {
    await this.exclusive(async () => {
      await this.client.putReportSchema(this.requireSession(), yaml);
    });
  }

  async refreshTimeline(): Promise<void> {
    const { versions } = await this.client.history(this.requireSession());
    const known = new Map(this.view.timeline.map((entry) => [entry.index, entry]));
    this.view.timeline = versions.map((entry: HistoryEntry) => ({
      index: entry.index,
      query: entry.query,
      yaml: entry.yaml,
      diff: known.get(entry.index)?.diff ?? [],
    }));
  }

  private applyGeneration(query: string, response: GenerationResponse): void {
    this.view.yaml = response.yaml;
    this.view.validation = response.validation;
    this.view.lastDiff = response.diff ?? [];
    this.view.failedAttempts = response.attempts.length - 1;
    this.view.timeline.push({
      index: this.view.timeline.length,
      query,
      yaml: response.yaml,
      diff: response.diff ?? [],
    });
  }

  private captureError(error: unknown): void {
    if (error instanceof ApiError) {
      this.view.error = `${error.detail.kind}: ${error.detail.message}`;
      if (error.detail.attempts) {
        this.view.failedAttempts = error.detail.attempts.length;
      }
    } else {
      this.view.error = String(error);
    }
  }

  private requireSession(): string {
    if (this.view.sessionId === null) {
      throw new Error("session not started");
    }
    return this.view.sessionId;
  }
}
