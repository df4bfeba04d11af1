/**
 * Figure builders over the documented run-artifact CSV schemas.
 *
 * plotErrorHistory: one log-y curve per run from error-history CSVs.
 * plotProfiles: solution-profile overlays, one panel per (variable, time).
 */

import { readFileSync, writeFileSync } from "node:fs";
import path from "node:path";

import { column, parseCsv, parseProfiles, ProfileColumns } from "./csv.js";
import { Curve, PanelSpec, renderFigure, THEME } from "./svg.js";

export interface CurveRef {
  csv: string;
  label: string;
  /** error-history column to plot, e.g. "u_rel_err" */
  column?: string;
}

export interface FigureSpec {
  kind: "error-history" | "profiles";
  output: string;
  title?: string;
  curves: CurveRef[];
}

export function loadSpec(specPath: string): FigureSpec {
  const spec = JSON.parse(readFileSync(specPath, "utf-8")) as FigureSpec;
  if (spec.kind !== "error-history" && spec.kind !== "profiles") {
    throw new Error(`${specPath}: unknown figure kind ${String(spec.kind)}`);
  }
  if (!Array.isArray(spec.curves) || spec.curves.length === 0) {
    throw new Error(`${specPath}: figure spec lists no curves`);
  }
  return spec;
}

export function plotErrorHistory(spec: FigureSpec, dir: string): string {
  const curves: Curve[] = spec.curves.map((ref, i) => {
    const file = path.join(dir, ref.csv);
    const table = parseCsv(readFileSync(file, "utf-8"), ref.csv);
    const col = ref.column ?? table.header[2];
    return {
      x: column(table, "time", ref.csv),
      y: column(table, col, ref.csv),
      label: ref.label,
      color: THEME.palette[i % THEME.palette.length],
    };
  });
  const panel: PanelSpec = {
    title: spec.title ?? "relative error history",
    xLabel: "time",
    yLabel: "relative error",
    logY: true,
    curves,
  };
  const svg = renderFigure([panel], curves);
  const out = path.join(dir, spec.output);
  writeFileSync(out, svg);
  return out;
}

export function plotProfiles(spec: FigureSpec, dir: string): string {
  const loaded: { ref: CurveRef; prof: ProfileColumns }[] = spec.curves.map(
    (ref) => {
      const file = path.join(dir, ref.csv);
      const table = parseCsv(readFileSync(file, "utf-8"), ref.csv);
      return { ref, prof: parseProfiles(table, ref.csv) };
    },
  );

  const base = loaded[0].prof;
  for (const { ref, prof } of loaded.slice(1)) {
    const missing = base.times.filter((t) => !prof.times.includes(t));
    if (missing.length > 0) {
      throw new Error(
        `${ref.csv}: snapshot times do not match (missing t=${missing.join(", t=")}; ` +
          `available: t=${prof.times.join(", t=")})`,
      );
    }
    if (prof.x.length !== base.x.length) {
      throw new Error(`${ref.csv}: grid size differs from ${spec.curves[0].csv}`);
    }
  }

  const panels: PanelSpec[] = [];
  for (const variable of base.variables) {
    for (const time of base.times) {
      const key = `${variable}@t=${time}`;
      const curves: Curve[] = loaded.map(({ ref, prof }, i) => {
        const y = prof.series.get(key);
        if (!y) {
          throw new Error(`${ref.csv}: column ${key} not found`);
        }
        return {
          x: prof.x,
          y,
          label: ref.label,
          color: THEME.palette[i % THEME.palette.length],
        };
      });
      panels.push({
        title: `${variable} at t=${time}`,
        xLabel: "x",
        yLabel: variable,
        logY: false,
        curves,
      });
    }
  }
  const legend = panels[0].curves;
  const svg = renderFigure(panels, legend);
  const out = path.join(dir, spec.output);
  writeFileSync(out, svg);
  return out;
}

export function renderSpecFile(specPath: string): string {
  const spec = loadSpec(specPath);
  const dir = path.dirname(specPath);
  if (spec.kind === "error-history") {
    return plotErrorHistory(spec, dir);
  }
  return plotProfiles(spec, dir);
}
