// Pure payload -> HTML renderers. No DOM access here, so the same code is
// exercised by the node test suite and by the browser glue in main.ts.

import { escapeHtml, isoMs, pointsLabel } from "./format.js";
import type { LeaderboardPayload, ProblemInfo, SubmissionView } from "./types.js";

export function renderLeaderboardTable(payload: LeaderboardPayload): string {
  const badge =
    payload.scope === "final"
      ? '<span class="badge final">FINAL</span>'
      : '<span class="badge live">LIVE</span>';
  if (payload.entries.length === 0) {
    return `<div class="board-head">${badge}</div><p class="empty">No submissions yet.</p>`;
  }
  const rows = payload.entries
    .map(
      (e) => `<tr>
  <td class="rank">${e.rank}</td>
  <td class="contestant">${escapeHtml(e.contestant_id)}</td>
  <td class="points">${pointsLabel(e.relative_points)}</td>
  <td class="score">${escapeHtml(e.total_score)}</td>
  <td class="achieved">${isoMs(e.achieved_at)}</td>
</tr>`,
    )
    .join("\n");
  return `<div class="board-head">${badge}</div>
<table class="leaderboard">
  <thead><tr><th>#</th><th>contestant</th><th>points</th><th>score</th><th>achieved</th></tr></thead>
  <tbody>
${rows}
  </tbody>
</table>`;
}

export function renderProblemOptions(problems: ProblemInfo[], selected: string): string {
  return problems
    .map((p) => {
      const sel = p.problem_id === selected ? " selected" : "";
      const label = `${p.problem_id} (${p.phase === "FINALIZED" ? "final" : "running"})`;
      return `<option value="${escapeHtml(p.problem_id)}"${sel}>${escapeHtml(label)}</option>`;
    })
    .join("");
}

const CHIP_CLASS: Record<string, string> = {
  OK: "ok",
  WRONG_ANSWER: "bad",
  TIME_LIMIT: "bad",
  WALL_LIMIT: "bad",
  MEMORY_LIMIT: "bad",
  OUTPUT_LIMIT: "bad",
  RUNTIME_ERROR: "bad",
  SYSTEM_ERROR: "warn",
};

export function renderSubmissionStatus(view: SubmissionView): string {
  const chips = view.public_results
    .map((r) => {
      const label = r.status ?? r.state;
      const cls = r.status ? (CHIP_CLASS[r.status] ?? "warn") : "pending";
      const detail = r.objective ? ` title="objective ${escapeHtml(r.objective)}"` : "";
      return `<span class="chip ${cls}"${detail}>${escapeHtml(r.test_id)}: ${escapeHtml(label)}</span>`;
    })
    .join(" ");
  const priv = view.private_summary;
  const privLine =
    priv.total > 0
      ? `<p class="private">${priv.evaluated}/${priv.total} private tests evaluated</p>`
      : "";
  let verdict: string;
  if (!view.finished) {
    verdict = `<p class="verdict pending">evaluating…</p>`;
  } else {
    const cls = view.aggregate_status === "ACCEPTED" ? "ok" : "bad";
    const pts = view.relative_points !== null ? ` · ${pointsLabel(view.relative_points)} points` : "";
    verdict = `<p class="verdict ${cls}">${escapeHtml(view.aggregate_status ?? "")}` +
      ` · public score ${escapeHtml(view.public_score ?? "0")}${pts}</p>`;
  }
  const compile = view.compile_message
    ? `<pre class="compile-log">${escapeHtml(view.compile_message)}</pre>`
    : "";
  return `<div class="submission" data-sid="${escapeHtml(view.submission_id)}">
<p class="sid">${escapeHtml(view.submission_id)}</p>
<div class="chips">${chips}</div>
${privLine}${verdict}${compile}
</div>`;
}
