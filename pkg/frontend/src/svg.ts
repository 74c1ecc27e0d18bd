/**
 * Minimal deterministic SVG scene builder.
 *
 * Fixed canvas, fixed fonts, fixed number formatting: identical inputs
 * produce byte-identical files.
 */

export const WIDTH = 800;
export const HEIGHT = 500;
export const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export type Scale = (v: number) => number;

function fmt(v: number): string {
  return v.toFixed(2);
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const span = Math.log10(hi) - llo || 1;
  return (v: number) => outLo + ((Math.log10(v) - llo) / span) * (outHi - outLo);
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const first = Math.ceil(lo / chosen) * chosen;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); e <= Math.floor(Math.log10(hi) + 1e-9); e++) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  return ticks;
}

export class Svg {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
        `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${escapeXml(title)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#000000", width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, opts: { anchor?: string; size?: number; fill?: string; attrs?: string } = {}): void {
    const anchor = opts.anchor ?? "start";
    const size = opts.size ?? 12;
    const fill = opts.fill ?? "#000000";
    const attrs = opts.attrs ? ` ${opts.attrs}` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}" fill="${fill}"${attrs}>${escapeXml(content)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xTicks: number[], yTicks: number[], xLabel: string, yLabel: string, tickFmt: (v: number) => string): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.line(x0, y0, x1, y0);
    this.line(x0, y0, x0, y1);
    for (const t of xTicks) {
      const px = xs(t);
      this.line(px, y0, px, y0 + 5);
      this.line(px, y0, px, y1, "#dddddd", 0.5);
      this.text(px, y0 + 18, tickFmt(t), { anchor: "middle", size: 11 });
    }
    for (const t of yTicks) {
      const py = ys(t);
      this.line(x0 - 5, py, x0, py);
      this.line(x0, py, x1, py, "#dddddd", 0.5);
      this.text(x0 - 8, py + 4, tickFmt(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, HEIGHT - 12, xLabel, { anchor: "middle", size: 13 });
    this.parts.push(
      `<text x="18" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${fmt((y0 + y1) / 2)})">${escapeXml(yLabel)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function sciFmt(v: number): string {
  if (v === 0) return "0";
  const e = Math.floor(Math.log10(Math.abs(v)));
  if (e >= -2 && e <= 3) {
    return String(Number(v.toPrecision(6)));
  }
  return v.toExponential(1);
}
