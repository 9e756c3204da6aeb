import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { loadRaw, loadSummary } from "../src/data.js";
import { renderPlot, renderToFile } from "../src/render.js";

const FIXTURES = join(__dirname, "fixtures");
const SUMMARY = join(FIXTURES, "summary.json");
const RAW = join(FIXTURES, "raw.csv");

function sha(path: string): string {
  return createHash("sha256").update(readFileSync(path)).digest("hex");
}

function countMatches(text: string, pattern: RegExp): number {
  return (text.match(pattern) ?? []).length;
}

describe("data loading", () => {
  it("parses the summary with consistent arrays", () => {
    const summary = loadSummary(SUMMARY);
    const names = Object.keys(summary.policies);
    expect(names.length).toBeGreaterThanOrEqual(2);
    for (const entry of Object.values(summary.policies)) {
      expect(entry.mean.length).toBe(entry.t.length);
      expect(entry.std.length).toBe(entry.t.length);
    }
  });

  it("parses the raw checkpoint traces", () => {
    const rows = loadRaw(RAW);
    expect(rows.length).toBeGreaterThan(0);
    expect(rows[0]).toHaveProperty("pseudoRegret");
    const policies = new Set(rows.map((r) => r.policy));
    expect(policies).toEqual(new Set(Object.keys(loadSummary(SUMMARY).policies)));
  });

  it("rejects missing files with a clear message", () => {
    expect(() => loadSummary(join(FIXTURES, "nope.json"))).toThrow(/not found/);
    expect(() => loadRaw(join(FIXTURES, "nope.csv"))).toThrow(/not found/);
  });
});

describe("rendering", () => {
  const spec = { summaryPath: SUMMARY, rawPath: RAW, outPath: "unused.svg" };

  it("draws one band and one mean line per policy, with legend labels", () => {
    const svg = renderPlot(spec);
    const names = Object.keys(loadSummary(SUMMARY).policies);
    expect(countMatches(svg, /class="band"/g)).toBe(names.length);
    expect(countMatches(svg, /class="mean"/g)).toBe(names.length);
    for (const name of names) {
      expect(svg).toContain(`data-policy="${name}"`);
      expect(svg).toContain(`>${name}</text>`);
    }
  });

  it("honors a policy subset and keeps its order", () => {
    const names = Object.keys(loadSummary(SUMMARY).policies);
    const pick = [names[1]];
    const svg = renderPlot({ ...spec, policies: pick });
    expect(countMatches(svg, /class="band"/g)).toBe(1);
    expect(svg).toContain(`data-policy="${names[1]}"`);
    expect(svg).not.toContain(`data-policy="${names[0]}"`);
  });

  it("names the offending policy when asked for an absent one", () => {
    expect(() => renderPlot({ ...spec, policies: ["not-a-policy"] })).toThrow(
      /unknown policy "not-a-policy"/,
    );
  });

  it("draws the dashed reference curve when the summary carries one", () => {
    const summary = loadSummary(SUMMARY);
    const svg = renderPlot(spec);
    if (summary.lower_bound) {
      expect(svg).toContain('class="lower-bound"');
      expect(svg).toContain("reference curve");
    }
  });

  it("zero-width bands for single-run summaries still render", () => {
    const summary = loadSummary(SUMMARY);
    const name = Object.keys(summary.policies)[0];
    const single = {
      config: summary.config,
      policies: {
        [name]: { ...summary.policies[name], std: summary.policies[name].t.map(() => 0) },
      },
    };
    const dir = mkdtempSync(join(tmpdir(), "pbplot-"));
    const singlePath = join(dir, "single.json");
    writeFileSync(singlePath, JSON.stringify(single));
    const svg = renderPlot({ ...spec, summaryPath: singlePath });
    expect(countMatches(svg, /class="band"/g)).toBe(1);
  });

  it("supports a logarithmic t axis", () => {
    const svg = renderPlot({ ...spec, logX: true });
    expect(countMatches(svg, /class="band"/g)).toBeGreaterThan(0);
  });

  it("is deterministic and leaves the inputs byte-identical", () => {
    const before = [sha(SUMMARY), sha(RAW)];
    const dir = mkdtempSync(join(tmpdir(), "pbplot-"));
    const outA = join(dir, "a.svg");
    const outB = join(dir, "b.svg");
    renderToFile({ ...spec, outPath: outA, title: "regret" });
    renderToFile({ ...spec, outPath: outB, title: "regret" });
    expect(readFileSync(outA, "utf8")).toBe(readFileSync(outB, "utf8"));
    expect([sha(SUMMARY), sha(RAW)]).toEqual(before);
  });
});
