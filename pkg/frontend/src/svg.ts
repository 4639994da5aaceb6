/**
 * Small SVG building blocks shared by all figures.
 *
 * Everything is string concatenation into a template-literal document; the
 * figures are simple enough that a scene graph would be overkill.
 */

// ---------------------------------------------------------------------------
// Text + number formatting
// ---------------------------------------------------------------------------

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Compact tick label: integers bare, small magnitudes in scientific form. */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("e+", "e");
  if (Number.isInteger(v)) return String(v);
  return String(parseFloat(v.toPrecision(4)));
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const nice = [1, 2, 5, 10].map((m) => m * mag);
  const step = nice.find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

// ---------------------------------------------------------------------------
// Frame: margins, scales, axes
// ---------------------------------------------------------------------------

export interface FrameOpts {
  width: number;
  height: number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  xLabel: string;
  yLabel: string;
  title: string;
  subtitle?: string;
}

export interface Frame {
  w: number;
  h: number;
  ml: number;
  mt: number;
  pw: number;
  ph: number;
  xOf: (v: number) => number;
  yOf: (v: number) => number;
  open: string;
  axes: string;
  close: string;
}

/**
 * Lay out a plot area with title, grid, ticks, and axis labels.  Callers
 * append their geometry between `open + axes` and `close`.
 */
export function makeFrame(o: FrameOpts): Frame {
  const ml = 62, mr = 18, mt = 40, mb = 46;
  const pw = o.width - ml - mr;
  const ph = o.height - mt - mb;
  const xSpan = o.xMax - o.xMin || 1;
  const ySpan = o.yMax - o.yMin || 1;
  const xOf = (v: number) => ml + ((v - o.xMin) / xSpan) * pw;
  const yOf = (v: number) => mt + ph - ((v - o.yMin) / ySpan) * ph;

  let open = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${o.width} ${o.height}" font-family="Helvetica, Arial, sans-serif">\n`;
  open += `<rect width="${o.width}" height="${o.height}" fill="#fff"/>\n`;
  open += `<text x="${ml}" y="${mt - 22}" font-size="11" font-weight="600" fill="#222">${esc(o.title)}</text>\n`;
  if (o.subtitle) {
    open += `<text x="${ml}" y="${mt - 10}" font-size="7.5" fill="#888">${esc(o.subtitle)}</text>\n`;
  }

  let axes = "";
  for (const v of niceTicks(o.yMin, o.yMax, 5)) {
    const y = yOf(v);
    axes += `<line x1="${ml}" y1="${y.toFixed(1)}" x2="${ml + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.6"/>\n`;
    axes += `<text x="${ml - 5}" y="${(y + 2.4).toFixed(1)}" font-size="7" fill="#555" text-anchor="end">${esc(fmtTick(v))}</text>\n`;
  }
  for (const v of niceTicks(o.xMin, o.xMax, 6)) {
    const x = xOf(v);
    axes += `<line x1="${x.toFixed(1)}" y1="${mt}" x2="${x.toFixed(1)}" y2="${mt + ph}" stroke="#f4f4f4" stroke-width="0.6"/>\n`;
    axes += `<text x="${x.toFixed(1)}" y="${mt + ph + 12}" font-size="7" fill="#555" text-anchor="middle">${esc(fmtTick(v))}</text>\n`;
  }
  // Plot border drawn after the grid so it stays crisp.
  axes += `<rect x="${ml}" y="${mt}" width="${pw}" height="${ph}" fill="none" stroke="#999" stroke-width="0.8"/>\n`;
  axes += `<text x="${ml + pw / 2}" y="${mt + ph + 28}" font-size="8.5" fill="#333" text-anchor="middle">${esc(o.xLabel)}</text>\n`;
  axes += `<text x="${ml - 44}" y="${mt + ph / 2}" font-size="8.5" fill="#333" text-anchor="middle" transform="rotate(-90 ${ml - 44} ${mt + ph / 2})">${esc(o.yLabel)}</text>\n`;

  return { w: o.width, h: o.height, ml, mt, pw, ph, xOf, yOf, open, axes, close: "</svg>\n" };
}

// ---------------------------------------------------------------------------
// Marks
// ---------------------------------------------------------------------------

export function polyline(
  pts: Array<[number, number]>,
  color: string,
  width = 1.4,
  dash = ""
): string {
  if (pts.length === 0) return "";
  const d = pts.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${d}" fill="none" stroke="${color}" stroke-width="${width}"${dashAttr} stroke-linejoin="round"/>\n`;
}

export interface LegendEntry {
  label: string;
  color: string;
  marker?: "line" | "dot" | "square" | "cross" | "ring";
}

export function legend(entries: LegendEntry[], x: number, y: number): string {
  let s = `<g font-size="7.5" fill="#333">\n`;
  entries.forEach((e, i) => {
    const ey = y + i * 12;
    const marker = e.marker ?? "line";
    if (marker === "line") {
      s += `<line x1="${x}" y1="${ey - 2.5}" x2="${x + 14}" y2="${ey - 2.5}" stroke="${e.color}" stroke-width="1.6"/>\n`;
    } else if (marker === "dot") {
      s += `<circle cx="${x + 7}" cy="${ey - 2.5}" r="3" fill="${e.color}"/>\n`;
    } else if (marker === "square") {
      s += `<rect x="${x + 4}" y="${ey - 5.5}" width="6" height="6" fill="${e.color}"/>\n`;
    } else if (marker === "ring") {
      s += `<circle cx="${x + 7}" cy="${ey - 2.5}" r="3.2" fill="none" stroke="${e.color}" stroke-width="1.4"/>\n`;
    } else {
      s += `<path d="M ${x + 4} ${ey - 5.5} l 6 6 M ${x + 10} ${ey - 5.5} l -6 6" stroke="${e.color}" stroke-width="1.4"/>\n`;
    }
    s += `<text x="${x + 18}" y="${ey}">${esc(e.label)}</text>\n`;
  });
  s += `</g>\n`;
  return s;
}
