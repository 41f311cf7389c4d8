/**
 * SVG chart rendering from a backend rendered-value dump.
 *
 * Marks are drawn at the dump's pixel coordinates, sizes and colors;
 * there is no client-side scale recomputation, only presentational
 * affordances (bar widths, heatmap cell extents) derived from mark
 * spacing. Lab colors convert to sRGB hex via the mirrored matrices.
 */

import { labToHex } from "./color.js";
import type { ChartSpec, RenderedDump, RenderedTupleDump } from "./types.js";

const DEFAULT_FILL = "#4682b4";
const DEFAULT_POINT_AREA = 20;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

function fillOf(t: RenderedTupleDump): string {
  return t.lab ? labToHex(t.lab) : DEFAULT_FILL;
}

function shapePath(t: RenderedTupleDump): string {
  const area = t.size ?? DEFAULT_POINT_AREA;
  const fill = fillOf(t);
  const cx = t.x;
  const cy = t.y;
  const title = t.group ? `<title>${esc(t.group)}</title>` : "";
  switch (t.shape ?? "circle") {
    case "square": {
      const s = Math.sqrt(area);
      return `<rect x="${cx - s / 2}" y="${cy - s / 2}" width="${s}" height="${s}" fill="${fill}">${title}</rect>`;
    }
    case "triangle-up": {
      const s = Math.sqrt((4 * area) / Math.sqrt(3));
      const h = (s * Math.sqrt(3)) / 2;
      const points = `${cx},${cy - (2 * h) / 3} ${cx - s / 2},${cy + h / 3} ${cx + s / 2},${cy + h / 3}`;
      return `<polygon points="${points}" fill="${fill}">${title}</polygon>`;
    }
    case "cross": {
      const s = Math.sqrt(area / 5);
      const a = s / 2;
      const b = 1.5 * s;
      const d =
        `M${cx - a},${cy - b}H${cx + a}V${cy - a}H${cx + b}V${cy + a}H${cx + a}` +
        `V${cy + b}H${cx - a}V${cy + a}H${cx - b}V${cy - a}H${cx - a}Z`;
      return `<path d="${d}" fill="${fill}">${title}</path>`;
    }
    case "diamond": {
      const d = Math.sqrt(2 * area) / 2;
      const points = `${cx},${cy - d} ${cx + d},${cy} ${cx},${cy + d} ${cx - d},${cy}`;
      return `<polygon points="${points}" fill="${fill}">${title}</polygon>`;
    }
    default: {
      const r = Math.sqrt(area / Math.PI);
      return `<circle cx="${cx}" cy="${cy}" r="${r}" fill="${fill}">${title}</circle>`;
    }
  }
}

function isMeasureAxis(spec: ChartSpec, channel: "x" | "y"): boolean {
  const enc = spec.encoding[channel];
  if (!enc) return false;
  if (enc.aggregate) return true;
  const kind = spec.data.fields.find((f) => f.name === enc.field)?.kind;
  return kind === "continuous" && !enc.bin;
}

function minGap(values: number[]): number {
  const unique = Array.from(new Set(values)).sort((a, b) => a - b);
  let gap = Infinity;
  for (let i = 1; i < unique.length; i += 1) gap = Math.min(gap, unique[i] - unique[i - 1]);
  return Number.isFinite(gap) ? gap : 10;
}

function barMarks(dump: RenderedDump): string[] {
  const spec = dump.spec;
  const vertical = isMeasureAxis(spec, "y") || !isMeasureAxis(spec, "x");
  if (vertical) {
    const width = minGap(dump.tuples.map((t) => t.x)) * 0.85;
    return dump.tuples.map((t) => {
      const h = spec.height - t.y;
      return `<rect x="${t.x - width / 2}" y="${t.y}" width="${width}" height="${h}" fill="${fillOf(t)}"/>`;
    });
  }
  const height = minGap(dump.tuples.map((t) => t.y)) * 0.85;
  return dump.tuples.map(
    (t) =>
      `<rect x="0" y="${t.y - height / 2}" width="${t.x}" height="${height}" fill="${fillOf(t)}"/>`,
  );
}

function rectMarks(dump: RenderedDump): string[] {
  const w = minGap(dump.tuples.map((t) => t.x));
  const h = minGap(dump.tuples.map((t) => t.y));
  return dump.tuples.map(
    (t) =>
      `<rect x="${t.x - w / 2}" y="${t.y - h / 2}" width="${w}" height="${h}" fill="${fillOf(t)}"/>`,
  );
}

function lineMarks(dump: RenderedDump): string[] {
  const groups = new Map<string, RenderedTupleDump[]>();
  for (const t of dump.tuples) {
    const key = t.group ?? "";
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(t);
  }
  const out: string[] = [];
  for (const key of Array.from(groups.keys()).sort()) {
    const pts = groups
      .get(key)!
      .slice()
      .sort((a, b) => a.x - b.x || a.y - b.y);
    const points = pts.map((t) => `${t.x},${t.y}`).join(" ");
    const stroke = pts[0].lab ? labToHex(pts[0].lab) : DEFAULT_FILL;
    out.push(
      `<polyline points="${points}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`,
    );
  }
  return out;
}

export function errorCard(message: string): string {
  return `<div class="error-card">${esc(message)}</div>`;
}

/** Full SVG element string for one rendered-view dump. */
export function renderChart(dump: RenderedDump): string {
  if (!dump || !dump.spec || !Array.isArray(dump.tuples)) {
    return errorCard("malformed rendered dump");
  }
  if (dump.tuples.length === 0) {
    return errorCard("rendered dump has no marks");
  }
  const { width, height, mark } = dump.spec;
  let marks: string[];
  switch (mark) {
    case "bar":
      marks = barMarks(dump);
      break;
    case "rect":
      marks = rectMarks(dump);
      break;
    case "line":
      marks = lineMarks(dump);
      break;
    default:
      marks = dump.tuples.map(shapePath);
  }
  return (
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg" class="chart" role="img">` +
    `<rect x="0" y="0" width="${width}" height="${height}" fill="#fbfbfb" stroke="#ddd"/>` +
    marks.join("") +
    `</svg>`
  );
}
