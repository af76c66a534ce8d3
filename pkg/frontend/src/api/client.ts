/**
 * Typed HTTP client for the stabres service.
 *
 * This is the explorer's only computational backend: every request goes to
 * the service and every response is validated against the wire schemas.
 * Long steps (stabilize, crosscheck, landscape) come back as 202 job
 * tickets that are polled at GET /jobs/{id}.
 */

import {
  CrosscheckDoc,
  type CrosscheckRequest,
  ErrorEnvelope,
  FitDoc,
  type FitRequest,
  JobAccepted,
  JobStatus,
  type LandscapeQuery,
  SessionCreated,
  SessionDoc,
  type StabilizeRequest,
  StationaryResponse,
  type StationaryRequest,
  TrajectoryDoc,
  type TrajectoryRequest,
  WindowsResult,
} from "./types.js";

export type {
  CrosscheckRequest,
  FitRequest,
  StabilizeRequest,
  StationaryRequest,
  TrajectoryRequest,
};

/** A non-2xx service response, carrying the parsed error envelope. */
export class ApiError extends Error {
  readonly status: number;
  readonly kind: string;
  readonly fields?: { field: string; message: string }[];
  readonly crossing?: ErrorEnvelope["crossing"];
  readonly hint?: string;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(envelope.message);
    this.name = "ApiError";
    this.status = status;
    this.kind = envelope.error;
    this.fields = envelope.fields;
    this.crossing = envelope.crossing;
    this.hint = envelope.hint;
  }

  /** True for the fit guard that rejects selections across a crossing. */
  get isCrossingGuard(): boolean {
    return this.status === 422 && this.kind === "crossing_guard";
  }
}

/** A polled job that finished in status "error". */
export class JobFailedError extends Error {
  readonly jobId: string;
  readonly errorType: string;

  constructor(job: JobStatus) {
    super(job.error ?? "job failed");
    this.name = "JobFailedError";
    this.jobId = job.job_id;
    this.errorType = job.error_type ?? "unknown";
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The service surface the explorer views depend on (stubbed in tests). */
export interface ExplorerApi {
  getSession(sessionId: string): Promise<SessionDoc>;
  fit(sessionId: string, body: FitRequest): Promise<FitDoc>;
  trajectory(sessionId: string, body: TrajectoryRequest): Promise<TrajectoryDoc>;
  stationary(sessionId: string, body: StationaryRequest): Promise<StationaryResponse>;
  crosscheckResult(
    sessionId: string,
    body: CrosscheckRequest,
    options?: PollOptions,
  ): Promise<CrosscheckDoc>;
}

export class ServiceClient implements ExplorerApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    const payload: unknown = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, ErrorEnvelope.parse(payload));
    }
    return payload;
  }

  async createSession(body: {
    id?: string;
    source?: string;
    units?: string;
    metadata?: Record<string, string>;
  } = {}): Promise<SessionCreated> {
    return SessionCreated.parse(await this.request("POST", "/sessions", body));
  }

  async getSession(sessionId: string): Promise<SessionDoc> {
    return SessionDoc.parse(await this.request("GET", `/sessions/${sessionId}`));
  }

  async stabilize(sessionId: string, body: StabilizeRequest): Promise<JobAccepted> {
    return JobAccepted.parse(await this.request("POST", `/sessions/${sessionId}/stabilize`, body));
  }

  async rewindow(
    sessionId: string,
    body: {
      flatness_tol?: number;
      min_points?: number;
      gap_tol?: number;
      guard_steps?: number;
    } = {},
  ): Promise<WindowsResult> {
    return WindowsResult.parse(await this.request("POST", `/sessions/${sessionId}/windows`, body));
  }

  async fit(sessionId: string, body: FitRequest): Promise<FitDoc> {
    return FitDoc.parse(await this.request("POST", `/sessions/${sessionId}/fit`, body));
  }

  async trajectory(sessionId: string, body: TrajectoryRequest): Promise<TrajectoryDoc> {
    return TrajectoryDoc.parse(await this.request("POST", `/sessions/${sessionId}/trajectory`, body));
  }

  async stationary(sessionId: string, body: StationaryRequest): Promise<StationaryResponse> {
    return StationaryResponse.parse(
      await this.request("POST", `/sessions/${sessionId}/stationary`, body),
    );
  }

  async crosscheck(sessionId: string, body: CrosscheckRequest): Promise<JobAccepted> {
    return JobAccepted.parse(await this.request("POST", `/sessions/${sessionId}/crosscheck`, body));
  }

  async landscape(sessionId: string, query: LandscapeQuery): Promise<JobAccepted> {
    const params = new URLSearchParams();
    params.set("seed_re", String(query.seed_re));
    if (query.seed_im !== undefined) params.set("seed_im", String(query.seed_im));
    if (query.alpha) params.set("alpha", query.alpha);
    if (query.theta) params.set("theta", query.theta);
    if (query.model) params.set("model", query.model);
    if (query.basis) params.set("basis", query.basis);
    return JobAccepted.parse(
      await this.request("GET", `/sessions/${sessionId}/landscape?${params.toString()}`),
    );
  }

  async job(jobId: string): Promise<JobStatus> {
    return JobStatus.parse(await this.request("GET", `/jobs/${jobId}`));
  }

  /** Poll a job ticket until done; returns the unvalidated result payload. */
  async pollJob(ticket: JobAccepted, options: PollOptions = {}): Promise<unknown> {
    const interval = options.intervalMs ?? 150;
    const deadline = Date.now() + (options.timeoutMs ?? 120_000);
    for (;;) {
      const status = await this.job(ticket.job_id);
      if (status.status === "done") return status.result;
      if (status.status === "error") throw new JobFailedError(status);
      if (Date.now() > deadline) {
        throw new Error(`job ${ticket.job_id} still ${status.status} after timeout`);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }

  /** Run crosscheck to completion and validate the resulting document. */
  async crosscheckResult(
    sessionId: string,
    body: CrosscheckRequest,
    options: PollOptions = {},
  ): Promise<CrosscheckDoc> {
    const ticket = await this.crosscheck(sessionId, body);
    return CrosscheckDoc.parse(await this.pollJob(ticket, options));
  }
}
