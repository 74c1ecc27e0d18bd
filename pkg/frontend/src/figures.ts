import { writeFileSync } from "node:fs";

import { numericColumn, readCsv, requireColumns } from "./csv.js";
import { logLogSlope } from "./fit.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  Svg,
  WIDTH,
  decadeTicks,
  linearScale,
  logScale,
  niceTicks,
  sciFmt,
} from "./svg.js";
import { readSnapshot } from "./snapshots.js";

export interface SnapshotRef {
  json: string;
  bin: string;
  field?: string;
  label?: string;
}

export interface FigureSpec {
  kind: "convergence" | "scaling" | "tv_history" | "snapshot_overlay";
  out: string;
  title?: string;
  /** convergence */
  sweep_csv?: string;
  quantities?: string[];
  /** scaling */
  scaling_csv?: string;
  quantity?: string;
  /** tv_history */
  diagnostics_csv?: string;
  /** snapshot_overlay */
  snapshots?: SnapshotRef[];
  fan?: { x_jump: number; t: number };
}

const PLOT = {
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

interface Series {
  label: string;
  x: number[];
  y: number[];
  /** log-log slope annotation, when meaningful */
  slope?: number;
}

function logLogFigure(title: string, xLabel: string, yLabel: string, series: Series[]): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  if (xs.some((v) => !(v > 0)) || ys.some((v) => !(v > 0))) {
    throw new Error("log-log figure needs positive data");
  }
  const sx = logScale(Math.min(...xs), Math.max(...xs), PLOT.x0 + 10, PLOT.x1 - 10);
  const sy = logScale(Math.min(...ys), Math.max(...ys), PLOT.y0 - 10, PLOT.y1 + 10);
  const svg = new Svg(title);
  svg.axes(sx, sy, decadeTicks(Math.min(...xs), Math.max(...xs)), decadeTicks(Math.min(...ys), Math.max(...ys)), xLabel, yLabel, sciFmt);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.x.map((v, j) => [sx(v), sy(s.y[j])] as [number, number]);
    svg.polyline(pts, color);
    pts.forEach(([px, py]) => svg.circle(px, py, 3, color));
    const label = s.slope === undefined ? s.label : `${s.label}  slope=${s.slope.toPrecision(15)}`;
    svg.text(PLOT.x0 + 12, PLOT.y1 + 16 + 16 * i, label, {
      fill: color,
      attrs: s.slope === undefined ? undefined : `data-series="${s.label}" data-slope="${s.slope.toPrecision(17)}"`,
    });
  });
  return svg.render();
}

function linearFigure(title: string, xLabel: string, yLabel: string, series: Series[], extras?: (svg: Svg, sx: (v: number) => number, sy: (v: number) => number) => void): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const sx = linearScale(Math.min(...xs), Math.max(...xs), PLOT.x0 + 10, PLOT.x1 - 10);
  const lo = Math.min(...ys);
  const hi = Math.max(...ys);
  const pad = 0.05 * (hi - lo || 1);
  const sy = linearScale(lo - pad, hi + pad, PLOT.y0 - 10, PLOT.y1 + 10);
  const svg = new Svg(title);
  svg.axes(sx, sy, niceTicks(Math.min(...xs), Math.max(...xs)), niceTicks(lo - pad, hi + pad), xLabel, yLabel, sciFmt);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    svg.polyline(s.x.map((v, j) => [sx(v), sy(s.y[j])] as [number, number]), color);
    svg.text(PLOT.x0 + 12, PLOT.y1 + 16 + 16 * i, s.label, { fill: color });
  });
  if (extras) {
    extras(svg, sx, sy);
  }
  return svg.render();
}

function renderConvergence(spec: FigureSpec): string {
  if (!spec.sweep_csv) {
    throw new Error("convergence figure needs sweep_csv");
  }
  const table = readCsv(spec.sweep_csv);
  const quantities = spec.quantities ?? ["err_w", "err_u"];
  const index = requireColumns(table, ["epsilon", ...quantities], spec.sweep_csv);
  const eps = numericColumn(table, index, "epsilon");
  const series: Series[] = quantities.map((q) => {
    const vals = numericColumn(table, index, q);
    const pairs = eps.map((e, i) => [e, vals[i]] as [number, number]).filter(([e, v]) => e > 0 && v > 0);
    if (pairs.length < 2) {
      throw new Error(`quantity ${q}: not enough positive data for a log-log plot`);
    }
    const x = pairs.map((p) => p[0]);
    const y = pairs.map((p) => p[1]);
    return { label: q, x, y, slope: logLogSlope(x, y) };
  });
  return logLogFigure(spec.title ?? "error against horizon", "horizon", "windowed L1 error", series);
}

function renderScaling(spec: FigureSpec): string {
  if (!spec.scaling_csv || !spec.quantity) {
    throw new Error("scaling figure needs scaling_csv and quantity");
  }
  const table = readCsv(spec.scaling_csv);
  const index = requireColumns(table, ["epsilon", "quantity_name", "value", "bound"], spec.scaling_csv);
  const qi = index.get("quantity_name")!;
  const rows = table.rows.filter((r) => r[qi] === spec.quantity);
  if (rows.length === 0) {
    const seen = [...new Set(table.rows.map((r) => r[qi]))].sort();
    throw new Error(`quantity ${spec.quantity} not found in ${spec.scaling_csv}; available: [${seen.join(", ")}]`);
  }
  const sub = { columns: table.columns, rows };
  const eps = numericColumn(sub, index, "epsilon");
  const vals = numericColumn(sub, index, "value");
  const bounds = numericColumn(sub, index, "bound");
  const series: Series[] = [
    { label: spec.quantity, x: eps, y: vals, slope: logLogSlope(eps, vals) },
  ];
  if (bounds.every((b) => Number.isFinite(b) && b > 0)) {
    series.push({ label: "bound", x: eps, y: bounds });
  }
  return logLogFigure(spec.title ?? `${spec.quantity} scaling`, "horizon", spec.quantity, series);
}

function renderTvHistory(spec: FigureSpec): string {
  if (!spec.diagnostics_csv) {
    throw new Error("tv_history figure needs diagnostics_csv");
  }
  const table = readCsv(spec.diagnostics_csv);
  const index = requireColumns(table, ["t", "tv_w", "tv_u"], spec.diagnostics_csv);
  const t = numericColumn(table, index, "t");
  const series: Series[] = [
    { label: "tv_w", x: t, y: numericColumn(table, index, "tv_w") },
    { label: "tv_u", x: t, y: numericColumn(table, index, "tv_u") },
  ];
  return linearFigure(spec.title ?? "total variation history", "t", "total variation", series);
}

function renderSnapshotOverlay(spec: FigureSpec): string {
  if (!spec.snapshots || spec.snapshots.length === 0) {
    throw new Error("snapshot_overlay figure needs snapshots");
  }
  const series: Series[] = spec.snapshots.map((ref) => {
    const snap = readSnapshot(ref.json, ref.bin);
    const field = ref.field ?? snap.header.fields[0];
    const vals = snap.fields.get(field);
    if (!vals) {
      throw new Error(`field ${field} not in ${ref.json}; available: [${snap.header.fields.join(", ")}]`);
    }
    return { label: ref.label ?? field, x: Array.from(snap.x), y: Array.from(vals) };
  });
  return linearFigure(spec.title ?? "snapshot overlay", "x", "density", series, (svg, sx) => {
    if (spec.fan) {
      const left = spec.fan.x_jump - spec.fan.t;
      const right = spec.fan.x_jump + spec.fan.t;
      for (const [edge, name] of [
        [left, "fan-left"],
        [right, "fan-right"],
      ] as Array<[number, string]>) {
        const px = sx(edge);
        svg.line(px, PLOT.y0, px, PLOT.y1, "#888888", 1, "6 4");
        svg.text(px, PLOT.y1 - 4, `${name}=${edge.toPrecision(8)}`, {
          anchor: "middle",
          size: 10,
          fill: "#555555",
          attrs: `data-fan-edge="${name}" data-x="${edge.toPrecision(17)}" data-px="${px.toFixed(2)}"`,
        });
      }
    }
  });
}

export function renderFigure(spec: FigureSpec): string {
  switch (spec.kind) {
    case "convergence":
      return renderConvergence(spec);
    case "scaling":
      return renderScaling(spec);
    case "tv_history":
      return renderTvHistory(spec);
    case "snapshot_overlay":
      return renderSnapshotOverlay(spec);
    default:
      throw new Error(`unknown figure kind: ${(spec as { kind: string }).kind}`);
  }
}

export function renderToFile(spec: FigureSpec): string {
  if (!spec.out) {
    throw new Error("figure spec needs an output path");
  }
  const svg = renderFigure(spec);
  writeFileSync(spec.out, svg, "utf-8");
  return spec.out;
}
