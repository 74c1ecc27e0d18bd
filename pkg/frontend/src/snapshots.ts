import { readFileSync } from "node:fs";

export interface SnapshotHeader {
  n_cells: number;
  dx: number;
  x_min: number;
  t: number;
  fields: string[];
  dtype: string;
  layout: string;
}

export interface Snapshot {
  header: SnapshotHeader;
  /** cell-center coordinates */
  x: Float64Array;
  /** field name -> values */
  fields: Map<string, Float64Array>;
}

/** Read a flat little-endian float64 dump with its JSON header. */
export function readSnapshot(jsonPath: string, binPath: string): Snapshot {
  const header = JSON.parse(readFileSync(jsonPath, "utf-8")) as SnapshotHeader;
  if (header.dtype !== "<f8") {
    throw new Error(`unsupported dtype ${header.dtype} in ${jsonPath}`);
  }
  const buf = readFileSync(binPath);
  const n = header.n_cells;
  const expected = n * header.fields.length * 8;
  if (buf.byteLength !== expected) {
    throw new Error(`snapshot ${binPath}: expected ${expected} bytes, found ${buf.byteLength}`);
  }
  const all = new Float64Array(buf.buffer, buf.byteOffset, n * header.fields.length);
  const fields = new Map<string, Float64Array>();
  header.fields.forEach((name, i) => {
    fields.set(name, all.slice(i * n, (i + 1) * n));
  });
  const x = new Float64Array(n);
  for (let j = 0; j < n; j++) {
    x[j] = header.x_min + (j + 0.5) * header.dx;
  }
  return { header, x, fields };
}
