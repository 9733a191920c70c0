/**
 * Log-log spreading fit, kept sample-for-sample identical to the analysis
 * module on the Python side: use samples with t > tMin and a positive finite
 * spread, require at least 8 of them, and fit the centered least-squares
 * slope of log(spread) against log(t).
 */

import { SchemaError } from "./csv";

export interface PowerLawFit {
  alpha: number;
  stderr: number;
  nSamples: number;
}

export function fitSpreadingExponent(
  times: number[],
  spread: number[],
  tMin: number,
): PowerLawFit {
  const lx: number[] = [];
  const ly: number[] = [];
  for (let i = 0; i < times.length; i++) {
    const t = times[i];
    const s = spread[i];
    if (t > tMin && s > 0 && Number.isFinite(t) && Number.isFinite(s)) {
      lx.push(Math.log(t));
      ly.push(Math.log(s));
    }
  }
  const n = lx.length;
  if (n < 8) {
    throw new SchemaError(
      `spreading fit needs >= 8 samples beyond t_min = ${tMin}, got ${n}`,
    );
  }
  let mx = 0;
  let my = 0;
  for (let i = 0; i < n; i++) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const alpha = sxy / sxx;
  let ssr = 0;
  for (let i = 0; i < n; i++) {
    const resid = ly[i] - (my + alpha * (lx[i] - mx));
    ssr += resid * resid;
  }
  const stderr = Math.sqrt(ssr / Math.max(n - 2, 1) / sxx);
  return { alpha, stderr, nSamples: n };
}
