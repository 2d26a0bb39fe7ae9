/**
 * Harness CSV schema: parsing, per-figure-kind validation, and row grouping.
 *
 * The experiment harness writes one CSV per run with a fixed column order;
 * `row_kind` distinguishes per-trial rows, per-sweep-point aggregates, and
 * theoretic ROC curve samples. Each figure kind consumes a subset of
 * columns and fails loudly (listing what is missing) on anything else.
 */

import { readFileSync } from "node:fs";

export type FigureKind = "error_vs_rate" | "roc" | "aud_compare";

export interface FigureStyle {
  log_y?: boolean;
  title?: string;
}

export interface FigureSpec {
  csv_path: string;
  figure_kind: FigureKind;
  output_image_path: string;
  style?: FigureStyle;
}

export class SchemaError extends Error {}
export class SpecFileError extends Error {}

export type CsvRow = Record<string, string>;

const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  error_vs_rate: [
    "row_kind", "J", "R", "noise_param",
    "empirical_error", "theoretic_error", "std_err",
  ],
  roc: ["row_kind", "J", "noise_param", "threshold", "fpr", "tpr"],
  aud_compare: [
    "row_kind", "R", "noise_param", "empirical_error", "omp_error",
  ],
};

export function parseCsv(text: string): { header: string[]; rows: CsvRow[] } {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("CSV is empty");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: CsvRow = {};
    header.forEach((name, i) => {
      row[name] = cells[i] ?? "";
    });
    return row;
  });
  return { header, rows };
}

export function loadRows(csvPath: string, kind: FigureKind): CsvRow[] {
  let text: string;
  try {
    text = readFileSync(csvPath, "utf-8");
  } catch (err) {
    throw new SchemaError(`cannot read CSV ${csvPath}: ${(err as Error).message}`);
  }
  const { header, rows } = parseCsv(text);
  const missing = REQUIRED_COLUMNS[kind].filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `CSV ${csvPath} does not match the ${kind} schema; ` +
      `missing columns: ${missing.join(", ")}`,
    );
  }
  return rows;
}

export function num(row: CsvRow, column: string): number {
  const raw = row[column];
  const value = Number(raw);
  if (raw === "" || raw === undefined || Number.isNaN(value)) {
    throw new SchemaError(`non-numeric value ${JSON.stringify(raw)} in column ${column}`);
  }
  return value;
}

/** Group rows by a key, preserving first-seen order. */
export function groupBy(rows: CsvRow[], key: (row: CsvRow) => string): Map<string, CsvRow[]> {
  const groups = new Map<string, CsvRow[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = groups.get(k);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(k, [row]);
    }
  }
  return groups;
}

const FIGURE_KINDS: FigureKind[] = ["error_vs_rate", "roc", "aud_compare"];

export function loadFigureSpec(path: string): FigureSpec {
  let payload: unknown;
  try {
    payload = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SpecFileError(`cannot parse figure spec ${path}: ${(err as Error).message}`);
  }
  const spec = payload as Partial<FigureSpec>;
  for (const field of ["csv_path", "figure_kind", "output_image_path"] as const) {
    if (typeof spec[field] !== "string" || spec[field]!.length === 0) {
      throw new SpecFileError(`figure spec ${path}: missing or invalid key '${field}'`);
    }
  }
  if (!FIGURE_KINDS.includes(spec.figure_kind as FigureKind)) {
    throw new SpecFileError(
      `figure spec ${path}: figure_kind must be one of ${FIGURE_KINDS.join(", ")}`,
    );
  }
  return spec as FigureSpec;
}
