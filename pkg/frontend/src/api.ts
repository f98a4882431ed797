// Thin typed client over the documented judge endpoints. Everything the UI
// shows flows through this module, so there is no side channel to audit.

import type {
  LeaderboardPayload,
  ProblemInfo,
  ProgressPayload,
  SubmissionView,
  SubmitRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public kind: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class JudgeApi {
  constructor(
    public baseUrl: string,
    public token: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
    };
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl.replace(/\/$/, "") + path, init);
    } catch (err) {
      throw new ApiError("Unreachable", String(err), 0);
    }
    if (!resp.ok) {
      let kind = `HTTP ${resp.status}`;
      let message = resp.statusText;
      try {
        const doc = (await resp.json()) as { error?: { kind: string; message: string } };
        if (doc.error) {
          kind = doc.error.kind;
          message = doc.error.message;
        }
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(kind, message, resp.status);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/api/v1/health");
  }

  async problems(): Promise<ProblemInfo[]> {
    const doc = await this.request<{ problems: ProblemInfo[] }>("GET", "/api/v1/problems");
    return doc.problems;
  }

  leaderboard(problemId: string, scope: "public" | "final"): Promise<LeaderboardPayload> {
    return this.request("GET", `/api/v1/problems/${problemId}/leaderboard?scope=${scope}`);
  }

  progress(problemId: string): Promise<ProgressPayload> {
    return this.request("GET", `/api/v1/problems/${problemId}/progress`);
  }

  submission(submissionId: string): Promise<SubmissionView> {
    return this.request("GET", `/api/v1/submissions/${submissionId}`);
  }

  async submit(req: SubmitRequest): Promise<string> {
    const doc = await this.request<{ submission_id: string }>(
      "POST",
      "/api/v1/submissions",
      req,
    );
    return doc.submission_id;
  }
}
