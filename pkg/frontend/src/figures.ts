/**
 * One builder per figure id.  Each builder names the run directories it
 * needs under the input root (the CLI's runs/<preset> layout), loads only
 * documented CSV columns, and writes a deterministic SVG.
 */

import { readdirSync, statSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import {
  column,
  metaNumber,
  readDensities,
  readTable,
  SchemaError,
  Table,
} from "./csv";
import { fitSpreadingExponent } from "./fit";
import {
  clippedPolyline,
  drawFrame,
  drawHeatmap,
  errorBars,
  linearScale,
  logScale,
  logTicks,
  Panel,
  Scale,
  SvgCanvas,
  ticks,
} from "./svg";

export const FIGURE_IDS = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  id: FigureId;
  inDir: string;
  outPath: string;
}

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

const TIME_COLS = ["t_si_ms", "t_dimless"];

interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
  gap: number;
}

const MARGINS: Margins = { left: 64, right: 16, top: 30, bottom: 50, gap: 78 };

function panels(svg: SvgCanvas, count: number): Panel[] {
  const m = MARGINS;
  const w = (svg.width - m.left - m.right - (count - 1) * m.gap) / count;
  const h = svg.height - m.top - m.bottom;
  const out: Panel[] = [];
  for (let i = 0; i < count; i++) {
    out.push({ x: m.left + i * (w + m.gap), y: m.top, w, h });
  }
  return out;
}

function extent(values: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of values) {
    for (const v of series) {
      if (Number.isFinite(v)) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const pad = 0.04 * (hi - lo);
  return [lo - pad, hi + pad];
}

function frameScales(
  panel: Panel,
  xDomain: [number, number],
  yDomain: [number, number],
): { xScale: Scale; yScale: Scale } {
  return {
    xScale: linearScale(xDomain, [panel.x, panel.x + panel.w]),
    yScale: linearScale(yDomain, [panel.y + panel.h, panel.y]),
  };
}

function legend(
  svg: SvgCanvas,
  panel: Panel,
  entries: { label: string; color: string; marker?: "line" | "circle" }[],
): void {
  let y = panel.y + 14;
  for (const entry of entries) {
    const x = panel.x + 10;
    if (entry.marker === "circle") {
      svg.circle(x + 9, y - 3.5, 3.5, "none", entry.color);
    } else {
      svg.line(x, y - 3.5, x + 18, y - 3.5, entry.color, 2);
    }
    svg.text(x + 24, y, entry.label, 10);
    y += 14;
  }
}

function densityPanel(
  svg: SvgCanvas,
  panel: Panel,
  densitiesPath: string,
  observables: Table,
  title: string,
): void {
  const density = readDensities(densitiesPath);
  const total = density.blocks.get("total")!;
  const rows = total.map((snap) => snap.values);
  drawHeatmap(svg, panel, rows);

  const xDomain: [number, number] = [density.xUm[0], density.xUm[density.xUm.length - 1]];
  const tEnd = total[total.length - 1].tMs;
  const { xScale, yScale } = frameScales(panel, xDomain, [0, tEnd]);
  drawFrame(svg, panel, {
    xLabel: "x (µm)",
    yLabel: "t (ms)",
    title,
    xTicks: ticks(xDomain[0], xDomain[1]),
    yTicks: ticks(0, tEnd),
    xScale,
    yScale,
  });
  clippedPolyline(
    svg,
    panel,
    column(observables, "x_mean_um"),
    column(observables, "t_si_ms"),
    xScale,
    yScale,
    "white",
  );
}

function tracePanel(
  svg: SvgCanvas,
  panel: Panel,
  series: { label: string; t: number[]; y: number[]; color: string; dash?: string }[],
  yLabel: string,
  title?: string,
): { xScale: Scale; yScale: Scale } {
  const xDomain = extent(series.map((s) => s.t));
  const yDomain = extent(series.map((s) => s.y));
  const { xScale, yScale } = frameScales(panel, xDomain, yDomain);
  drawFrame(svg, panel, {
    xLabel: "t (ms)",
    yLabel,
    title,
    xTicks: ticks(xDomain[0], xDomain[1]),
    yTicks: ticks(yDomain[0], yDomain[1]),
    xScale,
    yScale,
  });
  for (const s of series) {
    clippedPolyline(svg, panel, s.t, s.y, xScale, yScale, s.color, s.dash);
  }
  return { xScale, yScale };
}

// --- fig1: Bloch oscillation map plus directed-transport trace -------------

function renderFig1(spec: FigureSpec): string {
  const svg = new SvgCanvas(900, 420);
  const [left, right] = panels(svg, 2);

  const blochObs = readTable(join(spec.inDir, "fig1a", "observables.csv"), [
    ...TIME_COLS,
    "x_mean_um",
  ]);
  densityPanel(
    svg,
    left,
    join(spec.inDir, "fig1a", "densities.csv"),
    blochObs,
    "static tilt: Bloch oscillation",
  );

  const transport = readTable(join(spec.inDir, "fig1b", "observables.csv"), [
    ...TIME_COLS,
    "x_mean_um",
  ]);
  tracePanel(
    svg,
    right,
    [
      {
        label: "transport",
        t: column(transport, "t_si_ms"),
        y: column(transport, "x_mean_um"),
        color: COLORS[0],
      },
    ],
    "⟨x⟩ (µm)",
    "ac drive: directed transport",
  );
  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

// --- fig2: walk density map plus spreading traces ---------------------------

function renderFig2(spec: FigureSpec): string {
  const svg = new SvgCanvas(900, 420);
  const [left, right] = panels(svg, 2);

  const obs = readTable(join(spec.inDir, "fig2", "observables.csv"), [
    ...TIME_COLS,
    "x_mean_um",
    "x_std_um",
  ]);
  densityPanel(
    svg,
    left,
    join(spec.inDir, "fig2", "densities.csv"),
    obs,
    "coined walk: density",
  );

  const t = column(obs, "t_si_ms");
  tracePanel(
    svg,
    right,
    [
      { label: "mean", t, y: column(obs, "x_mean_um"), color: COLORS[0] },
      { label: "spread", t, y: column(obs, "x_std_um"), color: COLORS[1] },
    ],
    "⟨x⟩, Δx (µm)",
    "walk moments",
  );
  legend(svg, right, [
    { label: "mean position", color: COLORS[0] },
    { label: "spread", color: COLORS[1] },
  ]);
  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

// --- fig3: trembling traces per pulse angle ---------------------------------

const FIG3_RUNS = ["fig3_theta0", "fig3_theta005pi", "fig3_theta01pi", "fig3_theta02pi"];

function renderFig3(spec: FigureSpec): string {
  const svg = new SvgCanvas(640, 420);
  const [panel] = panels(svg, 1);
  const series = FIG3_RUNS.map((run, i) => {
    const obs = readTable(join(spec.inDir, run, "observables.csv"), [
      ...TIME_COLS,
      "x_mean_um",
    ]);
    return {
      label: String(obs.meta.get("scenario") ?? run).split(" ")[0],
      t: column(obs, "t_si_ms"),
      y: column(obs, "x_mean_um"),
      color: COLORS[i % COLORS.length],
    };
  });
  tracePanel(svg, panel, series, "⟨x⟩ (µm)", "pulsed lattice: trembling motion");
  legend(svg, panel, series.map((s) => ({ label: s.label, color: s.color })));
  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

// --- fig4: full runs against the discrete-map companion ---------------------

const FIG4_RUNS = ["fig4a", "fig4b", "fig4c"];

function renderFig4(spec: FigureSpec): string {
  const svg = new SvgCanvas(1200, 400);
  const threePanels = panels(svg, 3);
  FIG4_RUNS.forEach((run, i) => {
    const obs = readTable(join(spec.inDir, run, "observables.csv"), [
      ...TIME_COLS,
      "x_mean_um",
    ]);
    const map = readTable(join(spec.inDir, run, "observables_dirac_map.csv"), [
      ...TIME_COLS,
      "x_mean_um",
    ]);
    const panel = threePanels[i];
    const { xScale, yScale } = tracePanel(
      svg,
      panel,
      [
        {
          label: "full",
          t: column(obs, "t_si_ms"),
          y: column(obs, "x_mean_um"),
          color: COLORS[0],
        },
      ],
      "⟨x⟩ (µm)",
      run,
    );
    const mapT = column(map, "t_si_ms");
    const mapX = column(map, "x_mean_um");
    for (let j = 0; j < mapT.length; j++) {
      svg.circle(xScale(mapT[j]), yScale(mapX[j]), 3, "none", COLORS[1]);
    }
    if (i === 0) {
      legend(svg, panel, [
        { label: "full simulation", color: COLORS[0] },
        { label: "discrete map", color: COLORS[1], marker: "circle" },
      ]);
    }
  });
  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

// --- fig5: log-log spreading fits plus sweep summary -------------------------

interface SweepMemberRun {
  value: number;
  table: Table;
}

function sweepMembers(root: string, required: string[]): SweepMemberRun[] {
  let names: string[];
  try {
    names = readdirSync(root);
  } catch {
    throw new SchemaError(`missing sweep directory ${root}`);
  }
  const members: SweepMemberRun[] = [];
  for (const name of names) {
    if (!name.startsWith("kappa_") || !statSync(join(root, name)).isDirectory()) {
      continue;
    }
    const value = Number(name.slice("kappa_".length));
    members.push({
      value,
      table: readTable(join(root, name, "observables.csv"), required),
    });
  }
  if (members.length < 2) {
    throw new SchemaError(`sweep directory ${root} has fewer than 2 kappa members`);
  }
  members.sort((a, b) => a.value - b.value);
  return members;
}

export interface AnnotatedSlope {
  kappa: number;
  alpha: number;
}

/**
 * Fitted exponent per member, computed exactly like the analysis module:
 * dimensionless columns, t_min = 3 drive periods from the file header.
 */
export function fig5Slopes(members: SweepMemberRun[]): AnnotatedSlope[] {
  return members.map((member) => {
    const tMin = 3.0 * metaNumber(member.table, "drive_period_dimless");
    const fit = fitSpreadingExponent(
      column(member.table, "t_dimless"),
      column(member.table, "x_std_dimless"),
      tMin,
    );
    return { kappa: member.value, alpha: fit.alpha };
  });
}

function renderFig5(spec: FigureSpec): string {
  const root = join(spec.inDir, "fig5");
  const members = sweepMembers(root, [
    ...TIME_COLS,
    "x_std_um",
    "x_std_dimless",
  ]);
  const slopes = fig5Slopes(members);

  const svg = new SvgCanvas(900, 420);
  const [left, right] = panels(svg, 2);

  // log-log panel: drop t = 0, which has no logarithm
  const loglog = members.map((member) => {
    const t = column(member.table, "t_si_ms");
    const s = column(member.table, "x_std_um");
    const keep = t.map((v, i) => [v, s[i]]).filter(([tv, sv]) => tv > 0 && sv > 0);
    return { t: keep.map((p) => p[0]), s: keep.map((p) => p[1]) };
  });
  const tLo = Math.min(...loglog.map((m) => m.t[0]));
  const tHi = Math.max(...loglog.map((m) => m.t[m.t.length - 1]));
  const sLo = Math.min(...loglog.map((m) => Math.min(...m.s)));
  const sHi = Math.max(...loglog.map((m) => Math.max(...m.s)));
  const xScale = logScale([tLo, tHi], [left.x, left.x + left.w]);
  const yScale = logScale([sLo, sHi], [left.y + left.h, left.y]);
  drawFrame(svg, left, {
    xLabel: "t (ms)",
    yLabel: "Δx (µm)",
    title: "spreading exponents",
    xTicks: logTicks(tLo, tHi),
    yTicks: logTicks(sLo, sHi),
    xScale,
    yScale,
  });
  members.forEach((member, i) => {
    const color = COLORS[i % COLORS.length];
    clippedPolyline(svg, left, loglog[i].t, loglog[i].s, xScale, yScale, color);

    // dashed fit line drawn in display units; the slope is unit-invariant
    const tMinMs = 3.0 * metaNumber(member.table, "drive_period_dimless") *
      metaNumber(member.table, "time_unit_ms");
    const display = fitSpreadingExponent(loglog[i].t, loglog[i].s, tMinMs);
    const masked = loglog[i].t.filter((v) => v > tMinMs);
    const t0 = masked[0];
    const t1 = masked[masked.length - 1];
    const mid = Math.exp(
      masked.reduce((acc, v) => acc + Math.log(v), 0) / masked.length,
    );
    const sMid = Math.exp(
      loglog[i].s
        .filter((_, j) => loglog[i].t[j] > tMinMs)
        .reduce((acc, v) => acc + Math.log(v), 0) / masked.length,
    );
    const at = (t: number) => sMid * Math.pow(t / mid, display.alpha);
    clippedPolyline(svg, left, [t0, t1], [at(t0), at(t1)], xScale, yScale, "#444", "4 3");

    svg.text(
      left.x + 10,
      left.y + 16 + 14 * i,
      `κ = ${member.value} /s: α = ${slopes[i].alpha.toFixed(3)}`,
      10,
      "start",
      0,
      color,
    );
  });

  const summary = readTable(join(root, "summary.csv"), [
    "kappa",
    "x_std_final_um",
  ]);
  const kappas = column(summary, "kappa");
  const finals = column(summary, "x_std_final_um");
  const sx = linearScale(extent([kappas]), [right.x, right.x + right.w]);
  const sy = linearScale(extent([finals]), [right.y + right.h, right.y]);
  drawFrame(svg, right, {
    xLabel: "κ (1/s)",
    yLabel: "final Δx (µm)",
    title: "sweep summary",
    xTicks: ticks(extent([kappas])[0], extent([kappas])[1]),
    yTicks: ticks(extent([finals])[0], extent([finals])[1]),
    xScale: sx,
    yScale: sy,
  });
  clippedPolyline(svg, right, kappas, finals, sx, sy, COLORS[0]);
  kappas.forEach((k, i) => {
    svg.circle(sx(k), sy(finals[i]), 3, COLORS[0]);
  });

  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

// --- fig6: dephased trembling traces with error bars -------------------------

function renderFig6(spec: FigureSpec): string {
  const root = join(spec.inDir, "fig6");
  const members = sweepMembers(root, [
    ...TIME_COLS,
    "x_mean_um",
    "x_mean_stderr_um",
  ]);

  const svg = new SvgCanvas(640, 420);
  const [panel] = panels(svg, 1);
  const series = members.map((member, i) => ({
    label: `κ = ${member.value} /s`,
    t: column(member.table, "t_si_ms"),
    y: column(member.table, "x_mean_um"),
    stderr: column(member.table, "x_mean_stderr_um"),
    color: COLORS[i % COLORS.length],
  }));
  const { xScale, yScale } = tracePanel(
    svg,
    panel,
    series,
    "⟨x⟩ (µm)",
    "trembling motion under dephasing",
  );
  for (const s of series) {
    errorBars(svg, s.t, s.y, s.stderr, xScale, yScale, s.color);
  }
  legend(svg, panel, series.map((s) => ({ label: s.label, color: s.color })));
  writeFileSync(spec.outPath, svg.toString());
  return spec.outPath;
}

const BUILDERS: Record<FigureId, (spec: FigureSpec) => string> = {
  fig1: renderFig1,
  fig2: renderFig2,
  fig3: renderFig3,
  fig4: renderFig4,
  fig5: renderFig5,
  fig6: renderFig6,
};

export function render(spec: FigureSpec): string {
  return BUILDERS[spec.id](spec);
}

export function fig5SlopesFromDir(inDir: string): AnnotatedSlope[] {
  return fig5Slopes(
    sweepMembers(join(inDir, "fig5"), [...TIME_COLS, "x_std_um", "x_std_dimless"]),
  );
}
