/** Least-squares slope of log(y) against log(x), matching the harness fit. */
export function logLogSlope(x: number[], y: number[]): number {
  if (x.length !== y.length || x.length < 2) {
    throw new Error("need at least two (x, y) pairs to fit a slope");
  }
  for (let i = 0; i < x.length; i++) {
    if (!(x[i] > 0) || !(y[i] > 0)) {
      throw new Error(`log-log fit needs positive data, got (${x[i]}, ${y[i]})`);
    }
  }
  const lx = x.map(Math.log);
  const ly = y.map(Math.log);
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx === 0) {
    throw new Error("log-log fit needs at least two distinct x values");
  }
  return sxy / sxx;
}
