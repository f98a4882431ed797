// Progress chart: every submission as a point, plus the running-best step
// line. chartData is the single source for both the SVG and the CSV writer,
// so what the chart shows is exactly what `judge export-progress` exports.

import { escapeHtml, isoMs } from "./format.js";
import type { ProgressPayload } from "./types.js";

export interface ChartPoint {
  t: number;
  points: number;
  contestant: string;
  isNewBest: boolean;
}

export interface ChartData {
  points: ChartPoint[];
  bestLine: ChartPoint[];
}

export function chartData(payload: ProgressPayload): ChartData {
  const points = payload.points.map((p) => ({
    t: p.submitted_at,
    points: Number(p.relative_points),
    contestant: p.contestant_id,
    isNewBest: p.is_new_best,
  }));
  return { points, bestLine: points.filter((p) => p.isNewBest) };
}

export function progressCsv(payload: ProgressPayload): string {
  const lines = ["submitted_at,contestant_id,relative_points,is_new_best"];
  for (const p of payload.points) {
    lines.push(
      `${isoMs(p.submitted_at)},${p.contestant_id},${p.relative_points},${p.is_new_best ? "true" : "false"}`,
    );
  }
  return lines.join("\n") + "\n";
}

const W = 720;
const H = 300;
const PAD = 40;

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

export function renderChartSvg(data: ChartData): string {
  if (data.points.length === 0) {
    return `<svg viewBox="0 0 ${W} ${H}" class="chart"><text x="${W / 2}" y="${H / 2}" text-anchor="middle" class="empty">no submissions yet</text></svg>`;
  }
  const t0 = Math.min(...data.points.map((p) => p.t));
  const t1 = Math.max(...data.points.map((p) => p.t));
  const x = (t: number) => scale(t, t0, t1, PAD, W - PAD);
  const y = (points: number) => scale(points, 0, 100, H - PAD, PAD);

  const axis = `<line x1="${PAD}" y1="${y(0)}" x2="${W - PAD}" y2="${y(0)}" class="axis"/>
<line x1="${PAD}" y1="${y(0)}" x2="${PAD}" y2="${y(100)}" class="axis"/>
<text x="${PAD - 6}" y="${y(100) + 4}" text-anchor="end" class="tick">100</text>
<text x="${PAD - 6}" y="${y(0) + 4}" text-anchor="end" class="tick">0</text>`;

  // step line through the running-best points, extended to the last event
  let path = "";
  if (data.bestLine.length > 0) {
    const parts: string[] = [];
    let prev = data.bestLine[0];
    parts.push(`M ${x(prev.t).toFixed(1)} ${y(prev.points).toFixed(1)}`);
    for (const p of data.bestLine.slice(1)) {
      parts.push(`L ${x(p.t).toFixed(1)} ${y(prev.points).toFixed(1)}`);
      parts.push(`L ${x(p.t).toFixed(1)} ${y(p.points).toFixed(1)}`);
      prev = p;
    }
    parts.push(`L ${x(t1).toFixed(1)} ${y(prev.points).toFixed(1)}`);
    path = `<path d="${parts.join(" ")}" class="best-line"/>`;
  }

  const dots = data.points
    .map(
      (p) =>
        `<circle cx="${x(p.t).toFixed(1)}" cy="${y(p.points).toFixed(1)}" r="4" ` +
        `class="dot${p.isNewBest ? " best" : ""}">` +
        `<title>${escapeHtml(p.contestant)} · ${p.points} · ${isoMs(p.t)}</title></circle>`,
    )
    .join("\n");

  return `<svg viewBox="0 0 ${W} ${H}" class="chart">${axis}\n${path}\n${dots}</svg>`;
}
