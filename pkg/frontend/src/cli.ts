#!/usr/bin/env node
/**
 * duosec-plot — render one figure per invocation from planner artifacts.
 *
 * Usage:
 *   duosec-plot trajectory    --trajectory run/trajectory.csv --summary run/summary.json --out traj.svg
 *   duosec-plot per_slot_rate --rates run/rates.csv --out rates.svg
 *   duosec-plot sweep         --sweep sweep/sweep.csv --out sweep.svg
 *
 * Optional on all figures: --title, --x-label, --y-label.
 * Exit code 0 on success (including legitimately empty inputs), 1 on any
 * error (unreadable file, missing column, bad arguments).
 */

import { pathToFileURL } from "url";

import { render } from "./figures.js";
import type { FigureKind, FigureSpec } from "./figures.js";

const KINDS: FigureKind[] = ["trajectory", "per_slot_rate", "sweep"];

const USAGE =
  "usage: duosec-plot <trajectory|per_slot_rate|sweep> --out FILE " +
  "[--trajectory CSV] [--summary JSON] [--rates CSV] [--sweep CSV] " +
  "[--title T] [--x-label X] [--y-label Y]";

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

export function parseArgs(argv: string[]): FigureSpec {
  const [kind, ...rest] = argv;
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new Error(`expected a figure kind (${KINDS.join(" | ")})\n${USAGE}`);
  }
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i] ?? "";
    const value = rest[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument "${flag}"\n${USAGE}`);
    }
    flags.set(flag.slice(2), value);
  }
  const known = new Set([
    "out", "trajectory", "summary", "rates", "sweep",
    "title", "x-label", "y-label",
  ]);
  for (const f of flags.keys()) {
    if (!known.has(f)) throw new Error(`unknown flag "--${f}"\n${USAGE}`);
  }
  const out = flags.get("out");
  if (!out) throw new Error(`--out is required\n${USAGE}`);
  return {
    figure: kind as FigureKind,
    inputs: {
      trajectory: flags.get("trajectory"),
      summary: flags.get("summary"),
      rates: flags.get("rates"),
      sweep: flags.get("sweep"),
    },
    output: out,
    title: flags.get("title"),
    xLabel: flags.get("x-label"),
    yLabel: flags.get("y-label"),
  };
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

export async function main(argv: string[]): Promise<number> {
  try {
    const spec = parseArgs(argv);
    const out = await render(spec);
    console.log(`SVG → ${out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
