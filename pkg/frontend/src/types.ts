// Payload shapes of the judge API, as documented in the repository README.

export interface ProblemInfo {
  problem_id: string;
  title: string;
  direction: "MINIMIZE" | "MAXIMIZE";
  checker: string;
  phase: "RUNNING" | "FINALIZED";
  public_tests: number;
  private_tests: number;
}

export interface LeaderboardEntry {
  rank: number;
  contestant_id: string;
  best_submission_id: string;
  total_score: string;
  relative_points: string | null;
  achieved_at: number;
}

export interface LeaderboardPayload {
  problem_id: string;
  scope: "public" | "final";
  phase: "RUNNING" | "FINALIZED";
  entries: LeaderboardEntry[];
}

export interface ProgressPoint {
  submitted_at: number;
  contestant_id: string;
  submission_id: string;
  relative_points: string;
  is_new_best: boolean;
}

export interface ProgressPayload {
  problem_id: string;
  points: ProgressPoint[];
}

export interface ResultRow {
  test_id: string;
  state: "QUEUED" | "RUNNING" | "DONE" | "RETRIED" | "DEAD";
  status?: string;
  objective?: string;
  score?: string;
  usage?: { cpu_seconds: number; wall_seconds: number; peak_memory_bytes: number };
  stderr_excerpt?: string;
}

export interface SubmissionView {
  submission_id: string;
  problem_id: string;
  contestant_id: string;
  kind: string;
  language_profile: string;
  submitted_at: number;
  finished: boolean;
  aggregate_status: string | null;
  evaluated_at: number | null;
  public_results: ResultRow[];
  public_score: string | null;
  relative_points: string | null;
  private_summary: { total: number; evaluated: number; running: number };
  compile_message?: string;
}

export interface SubmitRequest {
  problem_id: string;
  kind: "SOURCE" | "BINARY";
  language_profile: string;
  payload: string; // base64
}
