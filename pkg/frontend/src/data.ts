import { readFileSync } from "node:fs";

import Papa from "papaparse";

import type { RawPoint, SummaryFile } from "./types.js";

export function loadSummary(path: string): SummaryFile {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new Error(`summary file not found: ${path}`);
  }
  const data = JSON.parse(text) as SummaryFile;
  if (!data || typeof data !== "object" || !data.policies) {
    throw new Error(`${path}: expected a summary object with a "policies" key`);
  }
  for (const [name, entry] of Object.entries(data.policies)) {
    const n = entry.t?.length;
    if (!n || entry.mean?.length !== n || entry.std?.length !== n) {
      throw new Error(`${path}: policy "${name}" has inconsistent t/mean/std arrays`);
    }
  }
  return data;
}

export function loadRaw(path: string): RawPoint[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new Error(`raw trace file not found: ${path}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), { header: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: CSV parse error on row ${first.row}: ${first.message}`);
  }
  const required = ["policy", "run", "t", "pseudo_regret"];
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column "${col}"`);
    }
  }
  return parsed.data.map((row) => ({
    policy: row.policy,
    run: Number(row.run),
    t: Number(row.t),
    pseudoRegret: Number(row.pseudo_regret),
  }));
}

/** Group raw checkpoints into per-(policy, run) polylines, in file order. */
export function groupRuns(points: RawPoint[]): Map<string, Map<number, RawPoint[]>> {
  const byPolicy = new Map<string, Map<number, RawPoint[]>>();
  for (const p of points) {
    let runs = byPolicy.get(p.policy);
    if (!runs) {
      runs = new Map();
      byPolicy.set(p.policy, runs);
    }
    let trace = runs.get(p.run);
    if (!trace) {
      trace = [];
      runs.set(p.run, trace);
    }
    trace.push(p);
  }
  return byPolicy;
}
