/**
 * Minimal CSV reading for the run artifacts produced by the experiment
 * CLI. Two schemas are consumed here:
 *
 *   error histories:  step,time,<var>_rel_err,...
 *   profiles:         x,<var>@t=<time>,...
 */

export interface Table {
  header: string[];
  rows: number[][];
}

export function parseCsv(text: string, name: string): Table {
  const lines = text.trim().split("\n");
  if (lines.length < 2) {
    throw new Error(`${name}: empty CSV (no data rows)`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(",").map(Number));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(`${name}: ragged row (expected ${header.length} cells)`);
    }
  }
  return { header, rows };
}

export function column(table: Table, name: string, file: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`${file}: column ${name} not found`);
  }
  return table.rows.map((r) => r[idx]);
}

/** Profile headers look like "rho@t=0.0625"; group them per variable. */
export interface ProfileColumns {
  variables: string[];
  times: string[];
  /** key `${variable}@t=${time}` -> column values */
  series: Map<string, number[]>;
  x: number[];
}

export function parseProfiles(table: Table, file: string): ProfileColumns {
  if (table.header[0] !== "x") {
    throw new Error(`${file}: profile CSV must start with an x column`);
  }
  const variables: string[] = [];
  const times: string[] = [];
  const series = new Map<string, number[]>();
  for (let j = 1; j < table.header.length; j++) {
    const name = table.header[j];
    const m = name.match(/^(.+)@t=(.+)$/);
    if (!m) {
      throw new Error(`${file}: malformed profile column ${name}`);
    }
    if (!variables.includes(m[1])) variables.push(m[1]);
    if (!times.includes(m[2])) times.push(m[2]);
    series.set(name, table.rows.map((r) => r[j]));
  }
  return { variables, times, series, x: table.rows.map((r) => r[0]) };
}
