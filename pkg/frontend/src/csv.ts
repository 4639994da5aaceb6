/**
 * Minimal CSV handling for duosec artifacts.
 *
 * The planner CLI writes plain comma-separated files with a single header
 * row and no quoting (all cells are numbers or bare identifiers), so a
 * hand-rolled split is enough — no parser dependency needed.
 */

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

export interface Table {
  /** Column names from the header row, in file order. */
  columns: string[];
  /** Data rows; each row has exactly columns.length cells. */
  rows: string[][];
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

export function parseCsv(text: string, source = "csv"): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${source}: no header row`);
  }
  const columns = (lines[0] ?? "").split(",").map((c) => c.trim());
  const rows: string[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",").map((c) => c.trim());
    if (cells.length !== columns.length) {
      throw new Error(
        `${source}: row has ${cells.length} cells, expected ${columns.length}`
      );
    }
    rows.push(cells);
  }
  return { columns, rows };
}

/**
 * Index lookup that fails loudly: a renamed or missing artifact column
 * should abort the figure, not silently plot NaNs.
 */
export function columnIndex(table: Table, name: string, source = "csv"): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`${source}: missing column "${name}"`);
  }
  return idx;
}

export function stringColumn(table: Table, name: string, source = "csv"): string[] {
  const idx = columnIndex(table, name, source);
  return table.rows.map((r) => r[idx] ?? "");
}

export function numberColumn(table: Table, name: string, source = "csv"): number[] {
  const idx = columnIndex(table, name, source);
  return table.rows.map((r, i) => {
    const cell = r[idx] ?? "";
    if (cell === "") return NaN; // sweep rows for failed runs leave cells empty
    const v = Number(cell);
    if (Number.isNaN(v)) {
      throw new Error(`${source}: column "${name}" row ${i} is not numeric: "${cell}"`);
    }
    return v;
  });
}
