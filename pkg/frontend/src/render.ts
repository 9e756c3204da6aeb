import { writeFileSync } from "node:fs";

import { scaleLinear, scaleLog } from "d3-scale";

import { groupRuns, loadRaw, loadSummary } from "./data.js";
import type { PlotSpec, SummaryFile } from "./types.js";

// Fixed palette so identical inputs render byte-identical images.
const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const MARGIN = { top: 42, right: 24, bottom: 46, left: 64 };

function fmt(v: number): string {
  // stable, compact coordinate formatting
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 100_000 || Math.abs(v) < 0.01)) {
    const exp = Math.round(Math.log10(Math.abs(v)));
    if (Math.abs(v - Math.sign(v) * 10 ** exp) < 1e-9 * Math.abs(v)) {
      return `${v < 0 ? "-" : ""}1e${exp}`;
    }
    return v.toExponential(1);
  }
  return String(Math.round(v * 1000) / 1000);
}

export function renderPlot(spec: PlotSpec): string {
  const summary = loadSummary(spec.summaryPath);
  const raw = loadRaw(spec.rawPath);
  const policies = resolvePolicies(spec, summary);

  const width = spec.width ?? 860;
  const height = spec.height ?? 520;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;

  let tMin = Infinity;
  let tMax = -Infinity;
  let yMax = -Infinity;
  for (const name of policies) {
    const entry = summary.policies[name];
    for (let i = 0; i < entry.t.length; i += 1) {
      tMin = Math.min(tMin, entry.t[i]);
      tMax = Math.max(tMax, entry.t[i]);
      yMax = Math.max(yMax, entry.mean[i] + entry.std[i]);
    }
  }
  if (summary.lower_bound) {
    yMax = Math.max(yMax, ...summary.lower_bound.value);
  }
  if (!isFinite(tMin) || !isFinite(yMax)) {
    throw new Error("nothing to plot: empty summary arrays");
  }

  const x = spec.logX
    ? scaleLog().domain([Math.max(tMin, 1), tMax]).range([0, innerW])
    : scaleLinear().domain([0, tMax]).range([0, innerW]);
  const y = scaleLinear().domain([0, yMax * 1.05]).range([innerH, 0]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(`<g transform="translate(${MARGIN.left},${MARGIN.top})">`);

  // axes and grid
  const xTicks = (spec.logX ? x.ticks(6) : x.ticks(8)).filter(
    (t) => t >= (spec.logX ? Math.max(tMin, 1) : 0) && t <= tMax,
  );
  const yTicks = y.ticks(8);
  for (const t of xTicks) {
    const px = x(t);
    parts.push(
      `<line class="grid" x1="${fmt(px)}" y1="0" x2="${fmt(px)}" y2="${innerH}" stroke="#e0e0e0"/>`,
    );
    parts.push(
      `<text class="tick" x="${fmt(px)}" y="${innerH + 20}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const v of yTicks) {
    const py = y(v);
    parts.push(
      `<line class="grid" x1="0" y1="${fmt(py)}" x2="${innerW}" y2="${fmt(py)}" stroke="#e0e0e0"/>`,
    );
    parts.push(
      `<text class="tick" x="-8" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${tickLabel(v)}</text>`,
    );
  }
  parts.push(`<line x1="0" y1="${innerH}" x2="${innerW}" y2="${innerH}" stroke="#333333"/>`);
  parts.push(`<line x1="0" y1="0" x2="0" y2="${innerH}" stroke="#333333"/>`);
  parts.push(
    `<text x="${fmt(innerW / 2)}" y="${innerH + 38}" text-anchor="middle" font-size="13">t</text>`,
  );
  parts.push(
    `<text transform="translate(${-46},${fmt(innerH / 2)}) rotate(-90)" text-anchor="middle" ` +
      `font-size="13">cumulative pseudo-regret</text>`,
  );

  // faint per-run traces from the raw checkpoints
  const runsByPolicy = groupRuns(raw);
  for (const [idx, name] of policies.entries()) {
    const color = PALETTE[idx % PALETTE.length];
    const runs = runsByPolicy.get(name);
    if (!runs) continue;
    for (const [run, tracePts] of runs) {
      const pts = tracePts
        .filter((p) => !spec.logX || p.t >= 1)
        .map((p) => `${fmt(x(p.t))},${fmt(y(p.pseudoRegret))}`)
        .join(" ");
      parts.push(
        `<polyline class="run" data-policy="${esc(name)}" data-run="${run}" points="${pts}" ` +
          `fill="none" stroke="${color}" stroke-width="0.6" opacity="0.35"/>`,
      );
    }
  }

  // mean +- one standard deviation band and the mean line per policy
  for (const [idx, name] of policies.entries()) {
    const entry = summary.policies[name];
    const color = PALETTE[idx % PALETTE.length];
    const keep = entry.t
      .map((t, i) => [t, i] as const)
      .filter(([t]) => !spec.logX || t >= 1)
      .map(([, i]) => i);
    const upper = keep.map(
      (i) => `${fmt(x(entry.t[i]))},${fmt(y(entry.mean[i] + entry.std[i]))}`,
    );
    const lower = keep
      .slice()
      .reverse()
      .map((i) => `${fmt(x(entry.t[i]))},${fmt(y(Math.max(entry.mean[i] - entry.std[i], 0)))}`);
    parts.push(
      `<polygon class="band" data-policy="${esc(name)}" points="${upper.join(" ")} ${lower.join(" ")}" ` +
        `fill="${color}" opacity="0.18" stroke="none"/>`,
    );
    const meanPts = keep
      .map((i) => `${fmt(x(entry.t[i]))},${fmt(y(entry.mean[i]))}`)
      .join(" ");
    parts.push(
      `<polyline class="mean" data-policy="${esc(name)}" points="${meanPts}" fill="none" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
  }

  // reference curve, dashed, when the summary carries one
  if (summary.lower_bound) {
    const lb = summary.lower_bound;
    const pts = lb.t
      .map((t, i) => [t, lb.value[i]] as const)
      .filter(([t]) => !spec.logX || t >= 1)
      .map(([t, v]) => `${fmt(x(t))},${fmt(y(Math.max(v, 0)))}`)
      .join(" ");
    parts.push(
      `<polyline class="lower-bound" points="${pts}" fill="none" stroke="#333333" ` +
        `stroke-width="1.2" stroke-dasharray="6 4"/>`,
    );
  }

  // legend
  parts.push(`<g class="legend" transform="translate(12,8)">`);
  let row = 0;
  for (const [idx, name] of policies.entries()) {
    const color = PALETTE[idx % PALETTE.length];
    parts.push(
      `<rect x="0" y="${row * 18}" width="14" height="10" fill="${color}" opacity="0.6"/>`,
    );
    parts.push(
      `<text class="legend-label" x="20" y="${row * 18 + 9}" font-size="12">${esc(name)}</text>`,
    );
    row += 1;
  }
  if (summary.lower_bound) {
    parts.push(
      `<line x1="0" y1="${row * 18 + 5}" x2="14" y2="${row * 18 + 5}" stroke="#333333" ` +
        `stroke-dasharray="6 4"/>`,
    );
    parts.push(
      `<text class="legend-label" x="20" y="${row * 18 + 9}" font-size="12">reference curve</text>`,
    );
  }
  parts.push(`</g>`);

  if (spec.title) {
    parts.push(
      `<text class="title" x="${fmt(innerW / 2)}" y="-22" text-anchor="middle" ` +
        `font-size="15" font-weight="bold">${esc(spec.title)}</text>`,
    );
  }
  parts.push(`</g>`);
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

function resolvePolicies(spec: PlotSpec, summary: SummaryFile): string[] {
  const available = Object.keys(summary.policies);
  if (!spec.policies || spec.policies.length === 0) {
    return available;
  }
  for (const name of spec.policies) {
    if (!available.includes(name)) {
      throw new Error(
        `unknown policy "${name}"; summary contains: ${available.join(", ")}`,
      );
    }
  }
  return spec.policies;
}

export function renderToFile(spec: PlotSpec): void {
  writeFileSync(spec.outPath, renderPlot(spec), "utf8");
}
