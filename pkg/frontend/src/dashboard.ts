/** Metric history panels: table rows and SVG line chart geometry.
 * Values are displayed exactly as the API reported them — no rounding, so
 * the dashboard can never disagree with the CLI or the raw reports. */

import type { EvaluationReport } from "./types.js";

export const METRIC_NAMES = ["accuracy", "precision", "recall", "f1"] as const;
export type MetricName = (typeof METRIC_NAMES)[number];

export interface MetricSeries {
  name: MetricName;
  points: { iteration: number; value: number }[];
}

export function metricSeries(evaluations: EvaluationReport[]): MetricSeries[] {
  return METRIC_NAMES.map((name) => ({
    name,
    points: evaluations.map((report) => ({ iteration: report.iteration, value: report[name] })),
  }));
}

/** Table rows: iteration plus each metric rendered verbatim. */
export function metricsTableRows(evaluations: EvaluationReport[]): string[][] {
  return evaluations.map((report) => [
    String(report.iteration),
    ...METRIC_NAMES.map((name) => String(report[name])),
    String(report.unparseable_count),
  ]);
}

/** SVG path for one metric series over the [0, 1] value range. */
export function linePath(
  values: number[],
  width: number,
  height: number,
  padding = 4,
): string {
  if (values.length === 0) return "";
  const innerWidth = width - 2 * padding;
  const innerHeight = height - 2 * padding;
  const step = values.length > 1 ? innerWidth / (values.length - 1) : 0;
  return values
    .map((value, index) => {
      const x = padding + (values.length > 1 ? index * step : innerWidth / 2);
      const y = padding + (1 - Math.min(1, Math.max(0, value))) * innerHeight;
      return `${index === 0 ? "M" : "L"}${round2(x)},${round2(y)}`;
    })
    .join(" ");
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}
