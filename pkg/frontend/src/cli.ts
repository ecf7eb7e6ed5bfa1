#!/usr/bin/env node
/**
 * Render simulator CSV outputs to SVG figures.
 *
 *   valleysim-figures kmap       pop_kmap.csv out.svg [band]
 *   valleysim-figures delay-scan sigma_tau.csv out.svg [lopt_reference.csv]
 *   valleysim-figures traces     sigma_t.csv out.svg
 *
 * Exits 2 on schema mismatch or missing columns; inputs are never modified.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { SchemaError } from "./errors.js";
import { renderDelayScanPanel, renderKmapPanel, renderTracePanel } from "./panels.js";

const USAGE = `usage:
  valleysim-figures kmap <pop_kmap.csv> <out.svg> [band]
  valleysim-figures delay-scan <sigma_tau.csv> <out.svg> [reference.csv]
  valleysim-figures traces <sigma_t.csv> <out.svg>`;

export function main(argv: string[]): number {
  const [kind, input, output, extra] = argv;
  if (!kind || !input || !output) {
    console.error(USAGE);
    return 2;
  }
  try {
    const text = readFileSync(input, "utf8");
    let svg: string;
    switch (kind) {
      case "kmap":
        svg = renderKmapPanel(text, extra !== undefined ? Number(extra) : -1);
        break;
      case "delay-scan":
        svg = renderDelayScanPanel(text, extra !== undefined
          ? readFileSync(extra, "utf8") : undefined);
        break;
      case "traces":
        svg = renderTracePanel(text);
        break;
      default:
        console.error(`unknown panel kind '${kind}'\n${USAGE}`);
        return 2;
    }
    writeFileSync(output, svg);
    console.log(`wrote ${output}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
