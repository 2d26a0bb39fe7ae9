#!/usr/bin/env node
/**
 * Render harness CSVs into SVG figures.
 *
 * Usage:
 *   mmv-figures render --spec fig2.json
 *
 * The figure spec is JSON: { "csv_path": "...", "figure_kind":
 * "error_vs_rate" | "roc" | "aud_compare", "output_image_path": "...",
 * "style": { "log_y": true, "title": "..." } }.
 *
 * Exit codes: 0 success, 1 schema/render failure, 2 usage error.
 */

import { pathToFileURL } from "node:url";

import { RenderError, renderToFile } from "./render.js";
import { SchemaError, SpecFileError, loadFigureSpec } from "./schema.js";

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "render") {
    process.stderr.write(`usage: mmv-figures render --spec <figure-spec.json>\n`);
    return 2;
  }
  const specIndex = rest.indexOf("--spec");
  if (specIndex === -1 || specIndex + 1 >= rest.length) {
    process.stderr.write("render: missing required --spec <figure-spec.json>\n");
    return 2;
  }
  const specPath = rest[specIndex + 1];
  try {
    const spec = loadFigureSpec(specPath);
    const path = renderToFile(spec);
    process.stdout.write(`wrote ${path}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SpecFileError) {
      process.stderr.write(`spec error: ${err.message}\n`);
      return 2;
    }
    if (err instanceof SchemaError || err instanceof RenderError) {
      process.stderr.write(`render error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
