#!/usr/bin/env node
/**
 * Render figures from figure-spec JSON files (as written by
 * `adrom plot-data`):
 *
 *   node dist/main.js runs/plotdata/error_history_spec.json [more specs...]
 *
 * Each spec names its input CSVs (relative to the spec's directory) and
 * the SVG file to write. Rendering is deterministic: the same inputs
 * always produce byte-identical SVGs.
 */

import { renderSpecFile } from "./plot.js";

const specs = process.argv.slice(2);
if (specs.length === 0) {
  console.error("usage: main.js FIGURE_SPEC.json [...]");
  process.exit(2);
}

let failed = false;
for (const spec of specs) {
  try {
    const out = renderSpecFile(spec);
    console.log(`wrote ${out}`);
  } catch (err) {
    console.error(`${spec}: ${err instanceof Error ? err.message : String(err)}`);
    failed = true;
  }
}
process.exit(failed ? 1 : 0);
