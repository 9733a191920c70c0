/**
 * Minimal deterministic SVG scene builder: linear/log scales with nice
 * ticks, framed panels, polylines, markers, error bars and block-averaged
 * heatmaps.  Output is a pure function of the inputs (no timestamps, fixed
 * number formatting), so re-rendering the same data gives identical bytes.
 */

export interface Scale {
  (value: number): number;
  invertible: boolean;
}

export interface Panel {
  x: number;
  y: number;
  w: number;
  h: number;
}

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

function px(value: number): string {
  const rounded = Math.round(value * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.invertible = true;
  return scale;
}

export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const scale = ((value: number) => inner(Math.log10(value))) as Scale;
  scale.invertible = true;
  return scale;
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const rawStep = (hi - lo) / count;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const mult of [1, 2, 5, 10]) {
    step = mult * power;
    if (step >= rawStep) {
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9 * step; v += step) {
    out.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    out.push(Math.pow(10, e));
  }
  return out.length >= 2 ? out : [lo, hi];
}

export function fmtTick(value: number): string {
  if (value === 0) {
    return "0";
  }
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) {
    return value.toExponential(0).replace("e+", "e");
  }
  return String(Number(value.toPrecision(6)));
}

// five-stop dark-to-bright map, linear interpolation per channel
const COLOR_STOPS: [number, number, number][] = [
  [13, 8, 135],
  [126, 3, 168],
  [204, 71, 120],
  [248, 149, 64],
  [240, 249, 33],
];

export function heatColor(value: number): string {
  const v = Math.min(Math.max(value, 0), 1);
  const pos = v * (COLOR_STOPS.length - 1);
  const i = Math.min(Math.floor(pos), COLOR_STOPS.length - 2);
  const frac = pos - i;
  const channel = (a: number, b: number) => Math.round(a + (b - a) * frac);
  const [r, g, b] = [0, 1, 2].map((c) =>
    channel(COLOR_STOPS[i][c], COLOR_STOPS[i + 1][c]),
  );
  return `rgb(${r},${g},${b})`;
}

export class SvgCanvas {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.parts.push(
      `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#000", strokeWidth = 1): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ` +
        `stroke="${stroke}" stroke-width="${strokeWidth}"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" ` +
        `fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  polyline(points: [number, number][], stroke: string, strokeWidth = 1.5, dash?: string): void {
    const coords = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${strokeWidth}"${dashAttr}/>`,
    );
  }

  text(
    x: number,
    y: number,
    content: string,
    size = 11,
    anchor: "start" | "middle" | "end" = "start",
    rotate = 0,
    fill = "#000",
  ): void {
    const transform = rotate !== 0 ? ` transform="rotate(${rotate} ${px(x)} ${px(y)})"` : "";
    this.parts.push(
      `<text x="${px(x)}" y="${px(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}" ${FONT}${transform}>${escapeXml(content)}</text>`,
    );
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export interface FrameOptions {
  xLabel: string;
  yLabel: string;
  title?: string;
  xTicks: number[];
  yTicks: number[];
  xScale: Scale;
  yScale: Scale;
}

export function drawFrame(svg: SvgCanvas, panel: Panel, opts: FrameOptions): void {
  const { x, y, w, h } = panel;
  svg.rect(x, y, w, h, "none", "#000");
  for (const tick of opts.xTicks) {
    const tx = opts.xScale(tick);
    if (tx < x - 0.5 || tx > x + w + 0.5) {
      continue;
    }
    svg.line(tx, y + h, tx, y + h + 4, "#000");
    svg.text(tx, y + h + 16, fmtTick(tick), 10, "middle");
  }
  for (const tick of opts.yTicks) {
    const ty = opts.yScale(tick);
    if (ty < y - 0.5 || ty > y + h + 0.5) {
      continue;
    }
    svg.line(x - 4, ty, x, ty, "#000");
    svg.text(x - 6, ty + 3.5, fmtTick(tick), 10, "end");
  }
  svg.text(x + w / 2, y + h + 32, opts.xLabel, 12, "middle");
  svg.text(x - 42, y + h / 2, opts.yLabel, 12, "middle", -90);
  if (opts.title) {
    svg.text(x + w / 2, y - 8, opts.title, 12, "middle");
  }
}

export function clippedPolyline(
  svg: SvgCanvas,
  panel: Panel,
  xs: number[],
  ys: number[],
  xScale: Scale,
  yScale: Scale,
  stroke: string,
  dash?: string,
): void {
  const points: [number, number][] = [];
  for (let i = 0; i < xs.length; i++) {
    const sx = xScale(xs[i]);
    const sy = yScale(ys[i]);
    if (Number.isFinite(sx) && Number.isFinite(sy)) {
      points.push([
        Math.min(Math.max(sx, panel.x), panel.x + panel.w),
        Math.min(Math.max(sy, panel.y), panel.y + panel.h),
      ]);
    }
  }
  svg.polyline(points, stroke, 1.5, dash);
}

export function errorBars(
  svg: SvgCanvas,
  xs: number[],
  ys: number[],
  halfSpans: number[],
  xScale: Scale,
  yScale: Scale,
  stroke: string,
): void {
  for (let i = 0; i < xs.length; i++) {
    if (!(halfSpans[i] > 0)) {
      continue;
    }
    const sx = xScale(xs[i]);
    const yLo = yScale(ys[i] - halfSpans[i]);
    const yHi = yScale(ys[i] + halfSpans[i]);
    svg.line(sx, yLo, sx, yHi, stroke, 1);
    svg.line(sx - 2, yLo, sx + 2, yLo, stroke, 1);
    svg.line(sx - 2, yHi, sx + 2, yHi, stroke, 1);
  }
}

function blockAverage(values: number[][], maxRows: number, maxCols: number): number[][] {
  const nRows = values.length;
  const nCols = values[0].length;
  const rowStep = Math.max(1, Math.ceil(nRows / maxRows));
  const colStep = Math.max(1, Math.ceil(nCols / maxCols));
  const out: number[][] = [];
  for (let r = 0; r < nRows; r += rowStep) {
    const row: number[] = [];
    for (let c = 0; c < nCols; c += colStep) {
      let sum = 0;
      let n = 0;
      for (let rr = r; rr < Math.min(r + rowStep, nRows); rr++) {
        for (let cc = c; cc < Math.min(c + colStep, nCols); cc++) {
          sum += values[rr][cc];
          n += 1;
        }
      }
      row.push(sum / n);
    }
    out.push(row);
  }
  return out;
}

/** Time-vs-position heatmap: one row per snapshot, rows stacked upward in time. */
export function drawHeatmap(
  svg: SvgCanvas,
  panel: Panel,
  rows: number[][],
  maxRows = 64,
  maxCols = 200,
): void {
  const cells = blockAverage(rows, maxRows, maxCols);
  let peak = 0;
  for (const row of cells) {
    for (const v of row) {
      peak = Math.max(peak, v);
    }
  }
  if (peak <= 0) {
    peak = 1;
  }
  const cellH = panel.h / cells.length;
  const cellW = panel.w / cells[0].length;
  for (let r = 0; r < cells.length; r++) {
    // first snapshot at the bottom edge
    const y = panel.y + panel.h - (r + 1) * cellH;
    for (let c = 0; c < cells[r].length; c++) {
      svg.rect(
        panel.x + c * cellW,
        y,
        cellW + 0.05,
        cellH + 0.05,
        heatColor(cells[r][c] / peak),
      );
    }
  }
}
