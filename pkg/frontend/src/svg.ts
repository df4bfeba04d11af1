/**
 * Deterministic SVG builders. No timestamps, no randomness, fixed theme:
 * identical inputs produce byte-identical files.
 */

export const THEME = {
  width: 640,
  panelHeight: 300,
  marginLeft: 64,
  marginRight: 16,
  marginTop: 34,
  marginBottom: 46,
  background: "#ffffff",
  grid: "#e6e6e6",
  axis: "#333333",
  fontFamily: "Helvetica, Arial, sans-serif",
  palette: [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
  ],
};

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const fmt = (v: number): string => {
  const s = v.toFixed(1);
  return s === "-0.0" ? "0.0" : s;
};

export interface Curve {
  x: number[];
  y: number[];
  label: string;
  color: string;
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  curves: Curve[];
}

function linTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const out: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    out.push(v);
  }
  return out;
}

function decadeTicks(min: number, max: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(min)); e <= Math.floor(Math.log10(max)); e++) {
    out.push(e);
  }
  return out;
}

/** Render one panel into an SVG fragment at the given vertical offset. */
function renderPanel(spec: PanelSpec, yOffset: number, clipId: string): string {
  const T = THEME;
  const pw = T.width - T.marginLeft - T.marginRight;
  const ph = T.panelHeight - T.marginTop - T.marginBottom;
  const x0 = T.marginLeft;
  const y0 = yOffset + T.marginTop;

  const xs = spec.curves.flatMap((c) => c.x);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const xOf = (v: number) => x0 + ((v - xMin) / (xMax - xMin || 1)) * pw;

  let yOf: (v: number) => number;
  let gridLines: string[] = [];
  let tickLabels: string[] = [];
  if (spec.logY) {
    const positives = spec.curves.flatMap((c) => c.y).filter((v) => v > 0);
    const yMin = positives.length ? Math.min(...positives) : 1e-16;
    const yMax = positives.length ? Math.max(...positives) : 1;
    const lo = Math.log10(yMin);
    const hi = Math.log10(yMax) + 1e-9 === lo ? lo + 1 : Math.log10(yMax);
    yOf = (v: number) =>
      y0 + ph - ((Math.log10(Math.max(v, yMin * 1e-3)) - lo) / (hi - lo || 1)) * ph;
    for (const e of decadeTicks(Math.pow(10, lo), Math.pow(10, hi))) {
      const yy = yOf(Math.pow(10, e));
      gridLines.push(`<line x1="${fmt(x0)}" y1="${fmt(yy)}" x2="${fmt(x0 + pw)}" y2="${fmt(yy)}" stroke="${THEME.grid}" stroke-width="0.6"/>`);
      tickLabels.push(`<text x="${fmt(x0 - 6)}" y="${fmt(yy + 3)}" font-size="9" text-anchor="end" fill="${T.axis}">1e${e}</text>`);
    }
  } else {
    const ys = spec.curves.flatMap((c) => c.y);
    const yMin = Math.min(...ys, 0);
    const yMax = Math.max(...ys);
    yOf = (v: number) => y0 + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;
    for (const v of linTicks(yMin, yMax, 5)) {
      const yy = yOf(v);
      gridLines.push(`<line x1="${fmt(x0)}" y1="${fmt(yy)}" x2="${fmt(x0 + pw)}" y2="${fmt(yy)}" stroke="${THEME.grid}" stroke-width="0.6"/>`);
      tickLabels.push(`<text x="${fmt(x0 - 6)}" y="${fmt(yy + 3)}" font-size="9" text-anchor="end" fill="${T.axis}">${Number(v.toPrecision(3))}</text>`);
    }
  }

  let s = "";
  s += `<text x="${fmt(x0)}" y="${fmt(yOffset + 16)}" font-size="12" font-weight="600" fill="#111">${esc(spec.title)}</text>\n`;
  s += gridLines.join("\n") + "\n";
  s += tickLabels.join("\n") + "\n";

  for (const v of linTicks(xMin, xMax, 6)) {
    const xx = xOf(v);
    s += `<line x1="${fmt(xx)}" y1="${fmt(y0 + ph)}" x2="${fmt(xx)}" y2="${fmt(y0 + ph + 4)}" stroke="${T.axis}" stroke-width="0.8"/>\n`;
    s += `<text x="${fmt(xx)}" y="${fmt(y0 + ph + 16)}" font-size="9" text-anchor="middle" fill="${T.axis}">${Number(v.toPrecision(4))}</text>\n`;
  }

  s += `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(pw)}" height="${fmt(ph)}" fill="none" stroke="${T.axis}" stroke-width="1"/>\n`;

  for (const curve of spec.curves) {
    const pts = curve.x
      .map((xv, i) => [xv, curve.y[i]] as const)
      .filter(([, yv]) => !spec.logY || yv > 0)
      .map(([xv, yv]) => `${fmt(xOf(xv))},${fmt(yOf(yv))}`)
      .join(" ");
    s += `<polyline clip-path="url(#${clipId})" fill="none" stroke="${curve.color}" stroke-width="1.4" points="${pts}"/>\n`;
  }

  s += `<text x="${fmt(x0 + pw / 2)}" y="${fmt(y0 + ph + 32)}" font-size="10" text-anchor="middle" fill="${T.axis}">${esc(spec.xLabel)}</text>\n`;
  s += `<text transform="translate(${fmt(x0 - 46)},${fmt(y0 + ph / 2)}) rotate(-90)" font-size="10" text-anchor="middle" fill="${T.axis}">${esc(spec.yLabel)}</text>\n`;
  return s;
}

function renderLegend(curves: Curve[], x: number, y: number): string {
  let s = "";
  curves.forEach((c, i) => {
    const yy = y + i * 14;
    s += `<line x1="${fmt(x)}" y1="${fmt(yy - 3)}" x2="${fmt(x + 18)}" y2="${fmt(yy - 3)}" stroke="${c.color}" stroke-width="1.6"/>\n`;
    s += `<text x="${fmt(x + 24)}" y="${fmt(yy)}" font-size="9" fill="#111">${esc(c.label)}</text>\n`;
  });
  return s;
}

/** Assemble a stack of panels sharing one legend into a full SVG document. */
export function renderFigure(panels: PanelSpec[], legendCurves: Curve[]): string {
  const T = THEME;
  const legendHeight = 10 + legendCurves.length * 14;
  const height = panels.length * T.panelHeight + legendHeight;
  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${T.width} ${height}" font-family="${T.fontFamily}">\n`;
  s += `<rect width="${T.width}" height="${height}" fill="${T.background}"/>\n`;
  s += `<defs><clipPath id="panel"><rect x="${T.marginLeft}" y="0" width="${T.width - T.marginLeft - T.marginRight}" height="${height}"/></clipPath></defs>\n`;
  panels.forEach((panel, i) => {
    s += renderPanel(panel, i * T.panelHeight, "panel");
  });
  s += renderLegend(legendCurves, T.marginLeft + 8, panels.length * T.panelHeight + 12);
  s += "</svg>\n";
  return s;
}
