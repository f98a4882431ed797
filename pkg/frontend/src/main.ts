// Browser glue: settings panel, pollers and form wiring around the pure
// render functions. Everything shown here comes from the documented API.

import { ApiError, JudgeApi } from "./api.js";
import { chartData, renderChartSvg } from "./chart.js";
import { Poller } from "./poller.js";
import {
  renderLeaderboardTable,
  renderProblemOptions,
  renderSubmissionStatus,
} from "./render.js";
import type { ProblemInfo } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

function storedUrl(): string {
  return localStorage.getItem("judge.url") || window.location.origin;
}

function storedToken(): string {
  return localStorage.getItem("judge.token") || "";
}

function api(): JudgeApi {
  return new JudgeApi(storedUrl(), storedToken());
}

let problems: ProblemInfo[] = [];
let currentProblem = "";
let currentSid: string | null = null;

function phaseOf(pid: string): "RUNNING" | "FINALIZED" {
  return problems.find((p) => p.problem_id === pid)?.phase ?? "RUNNING";
}

async function refreshProblems(): Promise<void> {
  problems = await api().problems();
  if (!currentProblem && problems.length > 0) {
    currentProblem = decodeURIComponent(window.location.hash.slice(1)) || problems[0].problem_id;
  }
  $<HTMLSelectElement>("problem-select").innerHTML = renderProblemOptions(
    problems,
    currentProblem,
  );
}

async function refreshLeaderboard(): Promise<void> {
  if (!currentProblem) return;
  // once the contest is finalized the board switches to the frozen standings
  const scope = phaseOf(currentProblem) === "FINALIZED" ? "final" : "public";
  const payload = await api().leaderboard(currentProblem, scope);
  $("leaderboard").innerHTML = renderLeaderboardTable(payload);
}

async function refreshProgress(): Promise<void> {
  if (!currentProblem) return;
  const payload = await api().progress(currentProblem);
  $("chart").innerHTML = renderChartSvg(chartData(payload));
}

async function refreshSubmission(): Promise<void> {
  if (!currentSid) return;
  const view = await api().submission(currentSid);
  $("submission-status").innerHTML = renderSubmissionStatus(view);
  if (view.finished) statusPoller.stop();
}

function banner(): void {
  const pollers = [problemsPoller, boardPoller, progressPoller];
  const stale = pollers.some((p) => p.isStale());
  const err = pollers.map((p) => p.lastError).find((e) => e);
  const el = $("banner");
  if (err) {
    el.textContent = `offline: ${err}`;
    el.className = "banner offline";
  } else if (stale) {
    el.textContent = "data may be stale";
    el.className = "banner stale";
  } else {
    el.textContent = "";
    el.className = "banner";
  }
}

const problemsPoller = new Poller(refreshProblems, 10_000, banner);
const boardPoller = new Poller(refreshLeaderboard, 5_000, banner);
const progressPoller = new Poller(refreshProgress, 10_000, banner);
const statusPoller = new Poller(refreshSubmission, 1_000, banner);

async function fileToBase64(file: File): Promise<string> {
  const buf = new Uint8Array(await file.arrayBuffer());
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < buf.length; i += chunk) {
    binary += String.fromCharCode(...buf.subarray(i, i + chunk));
  }
  return btoa(binary);
}

async function onSubmit(ev: Event): Promise<void> {
  ev.preventDefault();
  const fileInput = $<HTMLInputElement>("solution-file");
  const file = fileInput.files?.[0];
  const errEl = $("submit-error");
  errEl.textContent = "";
  if (!file) {
    errEl.textContent = "choose a solution file first";
    return;
  }
  const kind = $<HTMLSelectElement>("kind-select").value as "SOURCE" | "BINARY";
  const lang = $<HTMLInputElement>("lang-input").value.trim();
  try {
    const sid = await api().submit({
      problem_id: currentProblem,
      kind,
      language_profile: kind === "SOURCE" ? lang : "",
      payload: await fileToBase64(file),
    });
    currentSid = sid;
    $("submission-status").innerHTML = `<p class="sid">${sid} queued…</p>`;
    statusPoller.stop();
    statusPoller.start();
  } catch (err) {
    // 422/429/409 and friends are surfaced verbatim
    errEl.textContent =
      err instanceof ApiError ? `${err.kind}: ${err.message}` : String(err);
  }
}

function saveSettings(ev: Event): void {
  ev.preventDefault();
  localStorage.setItem("judge.url", $<HTMLInputElement>("url-input").value.trim());
  localStorage.setItem("judge.token", $<HTMLInputElement>("token-input").value.trim());
  restart();
}

function onProblemChange(): void {
  currentProblem = $<HTMLSelectElement>("problem-select").value;
  window.location.hash = encodeURIComponent(currentProblem);
  restart();
}

function restart(): void {
  for (const p of [problemsPoller, boardPoller, progressPoller]) {
    p.stop();
    p.start();
  }
}

document.addEventListener("DOMContentLoaded", () => {
  $<HTMLInputElement>("url-input").value = storedUrl();
  $<HTMLInputElement>("token-input").value = storedToken();
  $("settings-form").addEventListener("submit", saveSettings);
  $("submit-form").addEventListener("submit", (ev) => void onSubmit(ev));
  $("problem-select").addEventListener("change", onProblemChange);
  restart();
});
