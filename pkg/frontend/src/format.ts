// Formatting helpers shared by views and the CSV writer.

export function isoMs(ms: number): string {
  // matches the judge CLI's timestamp rendering byte for byte
  return new Date(ms).toISOString().replace("Z", "+00:00");
}

export function pointsLabel(points: string | null): string {
  if (points === null) return "—";
  const value = Number(points);
  return Number.isInteger(value) ? value.toFixed(1) : value.toFixed(2);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
