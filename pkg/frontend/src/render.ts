/**
 * Figure assembly: one renderer per figure kind, sharing the harness CSV
 * schema. Simulation points draw as markers with the theoretic limits as
 * lines; axis ranges derive from the data so nothing is clipped.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import {
  CsvRow,
  FigureSpec,
  SchemaError,
  groupBy,
  loadRows,
  num,
} from "./schema.js";
import {
  Figure,
  MARKERS,
  PALETTE,
  Scale,
  linearScale,
  logScale,
  padded,
  paddedLog,
} from "./svg.js";

export class RenderError extends Error {}

function fmtNoise(value: string): string {
  const v = Number(value);
  return Number.isInteger(v) ? String(v) : v.toPrecision(3);
}

function makeYScale(values: number[], wantLog: boolean): { scale: Scale; log: boolean } {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (wantLog && lo > 0) {
    return { scale: logScale(paddedLog(lo, hi), [0, 1]), log: true };
  }
  // zeros (or an explicit request) force a linear axis; nothing may clip
  return { scale: linearScale(padded(Math.min(lo, 0), hi), [0, 1]), log: false };
}

function errorVsRate(rows: CsvRow[], style: { log_y?: boolean; title?: string }): Figure {
  const aggregates = rows.filter((r) => r.row_kind === "aggregate");
  if (aggregates.length === 0) {
    throw new RenderError("no aggregate rows in CSV; nothing to plot");
  }
  const groups = groupBy(aggregates, (r) => `${r.J}|${r.noise_param}`);
  const manyNoises = new Set(aggregates.map((r) => r.noise_param)).size > 1;

  const xs: number[] = [];
  const ys: number[] = [];
  for (const row of aggregates) {
    xs.push(num(row, "R"));
    ys.push(num(row, "empirical_error"), num(row, "theoretic_error"));
  }
  const xScale = linearScale(padded(Math.min(...xs), Math.max(...xs)), [0, 1]);
  const { scale: yScale, log } = makeYScale(ys, style.log_y ?? true);

  const fig = new Figure(
    style.title ?? "Weighted support set error vs measurement rate",
    "measurement rate R",
    log ? "mean error (log scale)" : "mean error",
    xScale,
    yScale,
    640,
    440,
    (v) => v.toExponential(1),
  );

  let index = 0;
  for (const [key, group] of groups) {
    const [j, noise] = key.split("|");
    const label = manyNoises ? `J=${j}, noise=${fmtNoise(noise)}` : `J=${j}`;
    const color = PALETTE[index % PALETTE.length];
    const shape = MARKERS[index % MARKERS.length];
    const sorted = [...group].sort((a, b) => num(a, "R") - num(b, "R"));
    fig.addLine({
      label: `${label} (limit)`,
      color,
      points: sorted.map((r) => [num(r, "R"), num(r, "theoretic_error")]),
    });
    fig.addMarkers({
      label: `${label} (sim)`,
      color,
      shape,
      points: sorted.map((r) => [num(r, "R"), num(r, "empirical_error")]),
    });
    index += 1;
  }
  return fig;
}

function rocFigure(rows: CsvRow[], style: { title?: string }): Figure {
  const points = rows.filter((r) => r.row_kind === "roc_point");
  if (points.length === 0) {
    throw new RenderError("no roc_point rows in CSV; nothing to plot");
  }
  const groups = groupBy(points, (r) => `${r.J}|${r.noise_param}`);
  const fig = new Figure(
    style.title ?? "Support detection ROC",
    "false positive rate",
    "true positive rate",
    linearScale([0, 1], [0, 1]),
    linearScale([0, 1], [0, 1]),
    520,
    520,
    (v) => v.toFixed(1),
  );
  // chance-level reference
  const { margin, width, height } = fig;
  const x0 = margin.left;
  const y0 = margin.top;
  const w = width - margin.left - margin.right;
  const h = height - margin.top - margin.bottom;
  fig.addUnderlay(`<line class="diagonal" x1="${x0}" y1="${y0 + h}" ` +
    `x2="${x0 + w}" y2="${y0}" stroke="#bbb" stroke-dasharray="4 3"/>`);

  let index = 0;
  for (const [key, group] of groups) {
    const [j, noise] = key.split("|");
    const sorted = [...group].sort((a, b) => num(a, "fpr") - num(b, "fpr"));
    fig.addLine({
      label: `J=${j}, noise=${fmtNoise(noise)}`,
      color: PALETTE[index % PALETTE.length],
      points: sorted.map((r) => [num(r, "fpr"), num(r, "tpr")]),
      dash: index % 2 === 1 ? "5 3" : undefined,
    });
    index += 1;
  }
  return fig;
}

function audCompare(rows: CsvRow[], style: { log_y?: boolean; title?: string }): Figure {
  const aggregates = rows.filter((r) => r.row_kind === "aggregate");
  if (aggregates.length === 0) {
    throw new RenderError("no aggregate rows in CSV; nothing to plot");
  }
  const groups = groupBy(aggregates, (r) => r.noise_param);
  const xs = aggregates.map((r) => num(r, "R"));
  const ys: number[] = [];
  for (const row of aggregates) {
    ys.push(num(row, "empirical_error"), num(row, "omp_error"));
  }
  const xScale = linearScale(padded(Math.min(...xs), Math.max(...xs)), [0, 1]);
  const { scale: yScale, log } = makeYScale(ys, style.log_y ?? false);

  const fig = new Figure(
    style.title ?? "Active user detection: pipeline vs greedy baseline",
    "measurement rate R",
    log ? "mean Hamming distance (log scale)" : "mean Hamming distance",
    xScale,
    yScale,
  );
  let index = 0;
  for (const [noise, group] of groups) {
    const color = PALETTE[index % PALETTE.length];
    const sorted = [...group].sort((a, b) => num(a, "R") - num(b, "R"));
    fig.addLine({
      label: `pipeline, noise=${fmtNoise(noise)}`,
      color,
      points: sorted.map((r) => [num(r, "R"), num(r, "empirical_error")]),
    });
    fig.addLine({
      label: `OMP, noise=${fmtNoise(noise)}`,
      color,
      dash: "5 3",
      points: sorted.map((r) => [num(r, "R"), num(r, "omp_error")]),
    });
    fig.addMarkers({
      label: `pipeline points, noise=${fmtNoise(noise)}`,
      color,
      shape: MARKERS[index % MARKERS.length],
      points: sorted.map((r) => [num(r, "R"), num(r, "empirical_error")]),
    });
    index += 1;
  }
  return fig;
}

/** Render the figure described by the spec; returns the SVG text. */
export function renderFigure(spec: FigureSpec): string {
  const rows = loadRows(spec.csv_path, spec.figure_kind);
  const style = spec.style ?? {};
  let fig: Figure;
  switch (spec.figure_kind) {
    case "error_vs_rate":
      fig = errorVsRate(rows, style);
      break;
    case "roc":
      fig = rocFigure(rows, style);
      break;
    case "aud_compare":
      fig = audCompare(rows, style);
      break;
    default:
      throw new SchemaError(`unknown figure kind ${spec.figure_kind as string}`);
  }
  return fig.render();
}

/** Render and write the image; the file is only created on success. */
export function renderToFile(spec: FigureSpec): string {
  const svg = renderFigure(spec);
  mkdirSync(dirname(spec.output_image_path) || ".", { recursive: true });
  writeFileSync(spec.output_image_path, svg + "\n", "utf-8");
  return spec.output_image_path;
}
