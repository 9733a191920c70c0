import { existsSync, mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it, vi } from "vitest";

import { main, parseArgs } from "../src/cli";
import { SchemaError } from "../src/csv";
import { FIGURE_IDS, render } from "../src/figures";

const FIX = join(process.cwd(), "fixtures", "runs");

function tmpDir(): string {
  return mkdtempSync(join(tmpdir(), "figures-test-"));
}

function renderTo(id: (typeof FIGURE_IDS)[number], dir: string): string {
  const outPath = join(dir, `${id}.svg`);
  render({ id, inDir: FIX, outPath });
  return readFileSync(outPath, "utf8");
}

describe("render", () => {
  const dir = tmpDir();

  it.each(FIGURE_IDS)("%s produces a well-formed svg", (id) => {
    const svg = renderTo(id, dir);
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg.length).toBeGreaterThan(2000);
  });

  it.each(FIGURE_IDS)("%s renders byte-identically on repeat", (id) => {
    const first = renderTo(id, dir);
    const second = renderTo(id, tmpDir());
    expect(second).toBe(first);
  });

  it("fig1 labels both drive regimes", () => {
    const svg = renderTo("fig1", dir);
    expect(svg).toContain("static tilt: Bloch oscillation");
    expect(svg).toContain("ac drive: directed transport");
  });

  it("fig3 carries one labeled trace per pulse angle", () => {
    const svg = renderTo("fig3", dir);
    for (const run of ["fig3_theta0", "fig3_theta005pi", "fig3_theta01pi", "fig3_theta02pi"]) {
      expect(svg).toContain(run);
    }
  });

  it("fig4 overlays discrete-map markers on each panel", () => {
    const svg = renderTo("fig4", dir);
    const circles = svg.match(/<circle /g) ?? [];
    // 3 panels x 9 map samples, plus the legend marker
    expect(circles.length).toBeGreaterThanOrEqual(28);
    expect(svg).toContain("discrete map");
  });

  it("fig5 annotates every member with the fitted exponent", () => {
    const reference: Record<string, number> = JSON.parse(
      readFileSync(join(process.cwd(), "fixtures", "fig5_alpha_reference.json"), "utf8"),
    );
    const svg = renderTo("fig5", dir);
    for (const [kappa, alpha] of Object.entries(reference)) {
      expect(svg).toContain(`κ = ${kappa} /s: α = ${alpha.toFixed(3)}`);
    }
    expect(svg).toContain("sweep summary");
  });

  it("fig6 draws an error-barred trace per dephasing rate", () => {
    const svg = renderTo("fig6", dir);
    for (const label of ["κ = 0 /s", "κ = 20 /s", "κ = 100 /s"]) {
      expect(svg).toContain(label);
    }
  });

  it("fails with the missing path when a run is absent", () => {
    const empty = tmpDir();
    const attempt = () =>
      render({ id: "fig2", inDir: empty, outPath: join(empty, "out.svg") });
    expect(attempt).toThrowError(SchemaError);
    expect(attempt).toThrowError(join(empty, "fig2", "observables.csv"));
  });

  it("fails with the missing column when a sweep member is malformed", () => {
    const broken = tmpDir();
    for (const member of ["kappa_0", "kappa_1"]) {
      const sub = join(broken, "fig5", member);
      mkdirSync(sub, { recursive: true });
      writeFileSync(
        join(sub, "observables.csv"),
        "# observables\nt_si_ms,t_dimless\n0,0\n1,1\n",
      );
    }
    const attempt = () =>
      render({ id: "fig5", inDir: broken, outPath: join(broken, "out.svg") });
    expect(attempt).toThrowError("is missing column x_std_um");
  });
});

describe("cli", () => {
  it("parses a valid invocation", () => {
    const spec = parseArgs(["fig4", "--in", "runs", "--out", "fig4.svg"]);
    expect(spec).toEqual({ id: "fig4", inDir: "runs", outPath: "fig4.svg" });
  });

  it("rejects unknown figures, flags and missing values", () => {
    expect(() => parseArgs(["fig9"])).toThrowError("unknown figure fig9");
    expect(() => parseArgs(["fig1", "--frobnicate", "x"])).toThrowError(
      "unknown flag --frobnicate",
    );
    expect(() => parseArgs(["fig1", "--in"])).toThrowError("needs a value");
    expect(() => parseArgs(["fig1", "--in", "runs"])).toThrowError(
      "both --in and --out are required",
    );
  });

  it("returns 0 and writes the file on success", () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    const outPath = join(tmpDir(), "fig3.svg");
    expect(main(["fig3", "--in", FIX, "--out", outPath])).toBe(0);
    expect(existsSync(outPath)).toBe(true);
    expect(log).toHaveBeenCalledWith(outPath);
    log.mockRestore();
  });

  it("returns 2 on schema errors and reports them on stderr", () => {
    const error = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["fig2", "--in", tmpDir(), "--out", "out.svg"])).toBe(2);
    expect(error).toHaveBeenCalledOnce();
    expect(String(error.mock.calls[0][0])).toContain("error: missing input file");
    error.mockRestore();
  });
});
