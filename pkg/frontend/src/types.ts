export interface PolicySummary {
  runs: number;
  t: number[];
  mean: number[];
  std: number[];
  realized_mean?: number[];
}

export interface SummaryFile {
  config: Record<string, unknown>;
  policies: Record<string, PolicySummary>;
  lower_bound?: { t: number[]; value: number[] };
}

export interface RawPoint {
  policy: string;
  run: number;
  t: number;
  pseudoRegret: number;
}

export interface PlotSpec {
  summaryPath: string;
  rawPath: string;
  outPath: string;
  /** Policies to include; defaults to every policy in the summary. */
  policies?: string[];
  logX?: boolean;
  title?: string;
  width?: number;
  height?: number;
}
