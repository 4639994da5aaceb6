/**
 * Figure builders for duosec planner artifacts.
 *
 * Three figure kinds, one per artifact family:
 *
 *   trajectory    — top-down map: both UAV paths, Bob/Eve/target markers,
 *                   rings on the slots the sensing scheduler selected
 *   per_slot_rate — secrecy rate per slot as bars, colored by slot phase
 *   sweep         — average secrecy rate vs a swept scenario knob, one
 *                   curve per scheme
 *
 * Builders are pure (artifact text in, SVG text out) so they can be tested
 * without touching the filesystem; `render` adds the IO shell.
 */

import { readFile, writeFile } from "fs/promises";

import { columnIndex, numberColumn, parseCsv, stringColumn } from "./csv.js";
import { esc, legend, makeFrame, polyline } from "./svg.js";
import type { LegendEntry } from "./svg.js";

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

export type FigureKind = "trajectory" | "per_slot_rate" | "sweep";

export interface FigureSpec {
  /** Which layout to render. */
  figure: FigureKind;
  /** Input artifact paths, keyed by artifact name. */
  inputs: {
    trajectory?: string;
    summary?: string;
    rates?: string;
    sweep?: string;
  };
  /** Output SVG path. */
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

const SCHEME_COLORS = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#9d4edd",
  "#f4a261",
  "#577590",
];

// ---------------------------------------------------------------------------
// Trajectory map
// ---------------------------------------------------------------------------

interface TrajectoryStyle {
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

/**
 * Build the trajectory map from trajectory.csv plus the run's summary.json
 * (node positions and the sensing slot selection live in the summary).
 */
export function trajectoryFigure(
  trajectoryCsv: string,
  summaryJson: string,
  style: TrajectoryStyle = {}
): string {
  const table = parseCsv(trajectoryCsv, "trajectory.csv");
  const uavs = stringColumn(table, "uav", "trajectory.csv");
  const xs = numberColumn(table, "x_m", "trajectory.csv");
  const ys = numberColumn(table, "y_m", "trajectory.csv");
  columnIndex(table, "slot", "trajectory.csv");

  // Group waypoints per UAV, preserving file (slot) order.
  const paths = new Map<string, Array<[number, number]>>();
  for (let i = 0; i < uavs.length; i++) {
    const name = uavs[i] ?? "";
    if (!paths.has(name)) paths.set(name, []);
    paths.get(name)!.push([xs[i] ?? 0, ys[i] ?? 0]);
  }

  const summary = JSON.parse(summaryJson);
  const scenario = summary.scenario ?? {};
  const bob: [number, number] = [scenario.bob_pos?.[0] ?? 0, scenario.bob_pos?.[1] ?? 0];
  const eve: [number, number] = [scenario.eve_pos?.[0] ?? 0, scenario.eve_pos?.[1] ?? 0];
  const targets: Array<[number, number]> = (scenario.targets ?? []).map(
    (t: number[]) => [t[0] ?? 0, t[1] ?? 0]
  );

  // Sensing selection: union of assigned slots across schemes (1-based slot
  // index s = waypoint index s, the position held at the end of the slot).
  const selected = new Set<number>();
  for (const block of Object.values<any>(summary.schemes ?? {})) {
    const assignment = block?.sensing_assignment;
    if (!assignment) continue;
    for (const slots of Object.values<any>(assignment)) {
      for (const s of slots as number[]) selected.add(s);
    }
  }

  // Data bounds with padding, then stretch the smaller span so one meter
  // maps to the same number of pixels on both axes.
  const allX = [...xs, bob[0], eve[0], ...targets.map((t) => t[0])];
  const allY = [...ys, bob[1], eve[1], ...targets.map((t) => t[1])];
  let xMin = Math.min(...allX), xMax = Math.max(...allX);
  let yMin = Math.min(...allY), yMax = Math.max(...allY);
  const pad = 0.08 * Math.max(xMax - xMin, yMax - yMin, 1);
  xMin -= pad; xMax += pad; yMin -= pad; yMax += pad;
  const W = 560, H = 460;
  const pw = W - 80, ph = H - 86; // must match makeFrame margins
  const perPxX = (xMax - xMin) / pw;
  const perPxY = (yMax - yMin) / ph;
  if (perPxX > perPxY) {
    const grow = (perPxX * ph - (yMax - yMin)) / 2;
    yMin -= grow; yMax += grow;
  } else {
    const grow = (perPxY * pw - (xMax - xMin)) / 2;
    xMin -= grow; xMax += grow;
  }

  const fr = makeFrame({
    width: W,
    height: H,
    xMin, xMax, yMin, yMax,
    xLabel: style.xLabel ?? "x (m)",
    yLabel: style.yLabel ?? "y (m)",
    title: style.title ?? "UAV trajectories",
    subtitle: `${paths.size} UAVs · ${targets.length} targets · ${selected.size} sensing slots`,
  });

  let body = "";
  const entries: LegendEntry[] = [];
  let ci = 0;
  for (const [name, pts] of paths) {
    const color = SCHEME_COLORS[ci % SCHEME_COLORS.length] ?? "#333";
    ci++;
    const px = pts.map(([x, y]) => [fr.xOf(x), fr.yOf(y)] as [number, number]);
    body += polyline(px, color, 1.5);
    for (const [x, y] of px) {
      body += `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="1.7" fill="${color}"/>\n`;
    }
    // Rings on the sensing-selected waypoints.
    for (const s of selected) {
      const pt = pts[s];
      if (!pt) continue;
      body += `<circle cx="${fr.xOf(pt[0]).toFixed(1)}" cy="${fr.yOf(pt[1]).toFixed(1)}" r="4.4" fill="none" stroke="#b8860b" stroke-width="1.5"/>\n`;
    }
    entries.push({ label: `UAV ${name}`, color, marker: "line" });
  }

  // Ground nodes.
  const [bx, by] = [fr.xOf(bob[0]), fr.yOf(bob[1])];
  body += `<rect x="${(bx - 4).toFixed(1)}" y="${(by - 4).toFixed(1)}" width="8" height="8" fill="#2d6a4f"/>\n`;
  const [ex, ey] = [fr.xOf(eve[0]), fr.yOf(eve[1])];
  body += `<path d="M ${ex.toFixed(1)} ${(ey - 5).toFixed(1)} L ${(ex + 5).toFixed(1)} ${ey.toFixed(1)} L ${ex.toFixed(1)} ${(ey + 5).toFixed(1)} L ${(ex - 5).toFixed(1)} ${ey.toFixed(1)} Z" fill="#9d4edd"/>\n`;
  targets.forEach(([tx0, ty0], k) => {
    const tx = fr.xOf(tx0), ty = fr.yOf(ty0);
    body += `<path d="M ${(tx - 4).toFixed(1)} ${(ty - 4).toFixed(1)} l 8 8 M ${(tx + 4).toFixed(1)} ${(ty - 4).toFixed(1)} l -8 8" stroke="#555" stroke-width="1.6"/>\n`;
    body += `<text x="${(tx + 5).toFixed(1)}" y="${(ty - 5).toFixed(1)}" font-size="7" fill="#555">T${k + 1}</text>\n`;
  });

  entries.push({ label: "Bob", color: "#2d6a4f", marker: "square" });
  entries.push({ label: "Eve", color: "#9d4edd", marker: "dot" });
  entries.push({ label: "target", color: "#555", marker: "cross" });
  if (selected.size > 0) {
    entries.push({ label: "sensing slot", color: "#b8860b", marker: "ring" });
  }
  body += legend(entries, fr.ml + fr.pw - 96, fr.mt + 14);

  return fr.open + fr.axes + body + fr.close;
}

// ---------------------------------------------------------------------------
// Per-slot secrecy rate bars
// ---------------------------------------------------------------------------

const PHASE_COLORS: Record<string, string> = { sc: "#4361ee", scs: "#f4a261" };

export function perSlotRateFigure(
  ratesCsv: string,
  style: TrajectoryStyle = {}
): string {
  const table = parseCsv(ratesCsv, "rates.csv");
  const slots = numberColumn(table, "slot", "rates.csv");
  const phases = stringColumn(table, "phase", "rates.csv");
  const rates = numberColumn(table, "secrecy_rate", "rates.csv");

  const n = slots.length;
  const rateMax = rates.length ? Math.max(...rates) : 0;
  const fr = makeFrame({
    width: 620,
    height: 300,
    xMin: n > 0 ? 0.5 : 0,
    xMax: n > 0 ? n + 0.5 : 1,
    yMin: 0,
    yMax: rateMax > 0 ? rateMax * 1.1 : 1,
    xLabel: style.xLabel ?? "slot",
    yLabel: style.yLabel ?? "secrecy rate (bit/s/Hz)",
    title: style.title ?? "Per-slot secrecy rate",
    subtitle: n > 0 ? `${n} slots` : "no slots",
  });

  let body = "";
  const y0 = fr.yOf(0);
  const half = n > 0 ? 0.35 * (fr.xOf(1.5) - fr.xOf(0.5)) : 0;
  for (let i = 0; i < n; i++) {
    const x = fr.xOf(slots[i] ?? i + 1);
    const y = fr.yOf(rates[i] ?? 0);
    const color = PHASE_COLORS[phases[i] ?? ""] ?? "#888";
    body += `<rect x="${(x - half).toFixed(1)}" y="${y.toFixed(1)}" width="${(2 * half).toFixed(1)}" height="${Math.max(0, y0 - y).toFixed(1)}" fill="${color}" opacity="0.85"/>\n`;
  }

  const present = new Set(phases);
  const entries: LegendEntry[] = [];
  if (present.has("sc")) entries.push({ label: "communication slot", color: PHASE_COLORS["sc"]!, marker: "square" });
  if (present.has("scs")) entries.push({ label: "sensing slot", color: PHASE_COLORS["scs"]!, marker: "square" });
  if (entries.length > 0) body += legend(entries, fr.ml + 8, fr.mt + 14);

  return fr.open + fr.axes + body + fr.close;
}

// ---------------------------------------------------------------------------
// Sweep curves
// ---------------------------------------------------------------------------

export function sweepFigure(sweepCsv: string, style: TrajectoryStyle = {}): string {
  const table = parseCsv(sweepCsv, "sweep.csv");
  const schemes = stringColumn(table, "scheme", "sweep.csv");
  const params = stringColumn(table, "parameter", "sweep.csv");
  const values = numberColumn(table, "value", "sweep.csv");
  const asrs = numberColumn(table, "asr", "sweep.csv");
  const statuses = stringColumn(table, "status", "sweep.csv");

  interface Pt { v: number; asr: number }
  const byScheme = new Map<string, Pt[]>();
  let skipped = 0;
  for (let i = 0; i < schemes.length; i++) {
    if ((statuses[i] ?? "") !== "ok" || Number.isNaN(asrs[i] ?? NaN)) {
      skipped++;
      continue;
    }
    const name = schemes[i] ?? "";
    if (!byScheme.has(name)) byScheme.set(name, []);
    byScheme.get(name)!.push({ v: values[i] ?? 0, asr: asrs[i] ?? 0 });
  }
  for (const pts of byScheme.values()) pts.sort((a, b) => a.v - b.v);

  const okVals = [...byScheme.values()].flat();
  const vMin = okVals.length ? Math.min(...okVals.map((p) => p.v)) : 0;
  const vMax = okVals.length ? Math.max(...okVals.map((p) => p.v)) : 1;
  const aMax = okVals.length ? Math.max(...okVals.map((p) => p.asr)) : 1;
  const parameter = params[0] ?? "parameter";

  const noteParts = [`${byScheme.size} schemes`];
  if (skipped > 0) noteParts.push(`${skipped} failed points omitted`);
  const fr = makeFrame({
    width: 620,
    height: 320,
    xMin: vMin,
    xMax: vMax === vMin ? vMin + 1 : vMax,
    yMin: 0,
    yMax: aMax > 0 ? aMax * 1.12 : 1,
    xLabel: style.xLabel ?? parameter,
    yLabel: style.yLabel ?? "average secrecy rate (bit/s/Hz)",
    title: style.title ?? `Average secrecy rate vs ${parameter}`,
    subtitle: noteParts.join(" · "),
  });

  let body = "";
  const entries: LegendEntry[] = [];
  let ci = 0;
  for (const [name, pts] of byScheme) {
    const color = SCHEME_COLORS[ci % SCHEME_COLORS.length] ?? "#333";
    ci++;
    const px = pts.map((p) => [fr.xOf(p.v), fr.yOf(p.asr)] as [number, number]);
    body += polyline(px, color, 1.5);
    for (const [x, y] of px) {
      body += `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2.6" fill="${color}"/>\n`;
    }
    entries.push({ label: name, color, marker: "line" });
  }
  if (entries.length > 0) body += legend(entries, fr.ml + 10, fr.mt + 14);
  else body += `<text x="${fr.ml + fr.pw / 2}" y="${fr.mt + fr.ph / 2}" font-size="9" fill="#999" text-anchor="middle">${esc("no successful sweep points")}</text>\n`;

  return fr.open + fr.axes + body + fr.close;
}

// ---------------------------------------------------------------------------
// IO shell
// ---------------------------------------------------------------------------

function requireInput(spec: FigureSpec, key: keyof FigureSpec["inputs"]): string {
  const p = spec.inputs[key];
  if (!p) {
    throw new Error(`figure "${spec.figure}" needs --${key} <path>`);
  }
  return p;
}

/** Read the inputs the figure needs, build the SVG, write it out. */
export async function render(spec: FigureSpec): Promise<string> {
  const style = { title: spec.title, xLabel: spec.xLabel, yLabel: spec.yLabel };
  let svg: string;
  if (spec.figure === "trajectory") {
    const traj = await readFile(requireInput(spec, "trajectory"), "utf-8");
    const summary = await readFile(requireInput(spec, "summary"), "utf-8");
    svg = trajectoryFigure(traj, summary, style);
  } else if (spec.figure === "per_slot_rate") {
    const rates = await readFile(requireInput(spec, "rates"), "utf-8");
    svg = perSlotRateFigure(rates, style);
  } else if (spec.figure === "sweep") {
    const sweep = await readFile(requireInput(spec, "sweep"), "utf-8");
    svg = sweepFigure(sweep, style);
  } else {
    throw new Error(`unknown figure kind "${spec.figure}"`);
  }
  await writeFile(spec.output, svg);
  return spec.output;
}
