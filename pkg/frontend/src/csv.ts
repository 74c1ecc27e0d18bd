import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: string[][];
}

/** Parse a simple comma-separated file (no quoting; the harness never quotes). */
export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf-8");
  const lines = text
    .split("\n")
    .map((l) => l.trimEnd())
    .filter((l) => l.length > 0 && !l.startsWith("#"));
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${path}`);
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new Error(`CSV has no data rows: ${path}`);
  }
  return { columns, rows };
}

/** Require columns to exist; the error lists what was expected and found. */
export function requireColumns(table: Table, needed: string[], path: string): Map<string, number> {
  const index = new Map<string, number>();
  table.columns.forEach((c, i) => index.set(c, i));
  const missing = needed.filter((c) => !index.has(c));
  if (missing.length > 0) {
    throw new Error(
      `missing columns in ${path}: expected [${needed.join(", ")}], ` +
        `missing [${missing.join(", ")}], found [${table.columns.join(", ")}]`,
    );
  }
  return index;
}

/** Numeric column; blank cells become NaN. */
export function numericColumn(table: Table, index: Map<string, number>, name: string): number[] {
  const i = index.get(name)!;
  return table.rows.map((r) => (r[i] === "" || r[i] === undefined ? NaN : Number(r[i])));
}
