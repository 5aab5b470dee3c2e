/**
 * Box-plot statistics computed client-side from the raw per-bus/per-line
 * arrays in the analysis payload. Quartile method: linear interpolation
 * between closest ranks, q(p) = x[(n-1)p] with fractional indexing.
 */

export interface BoxSummary {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
}

export function quantileLinear(sorted: number[], p: number): number {
  if (sorted.length === 0) throw new Error("empty sample");
  const pos = (sorted.length - 1) * p;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export function boxSummary(values: number[]): BoxSummary {
  if (values.length === 0) throw new Error("empty sample");
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantileLinear(sorted, 0.25);
  const median = quantileLinear(sorted, 0.5);
  const q3 = quantileLinear(sorted, 0.75);
  const iqr = q3 - q1;
  const loFence = q1 - 1.5 * iqr;
  const hiFence = q3 + 1.5 * iqr;
  const inliers = sorted.filter((v) => v >= loFence && v <= hiFence);
  return {
    min: sorted[0],
    q1,
    median,
    q3,
    max: sorted[sorted.length - 1],
    whiskerLow: inliers[0],
    whiskerHigh: inliers[inliers.length - 1],
    outliers: sorted.filter((v) => v < loFence || v > hiFence),
  };
}
