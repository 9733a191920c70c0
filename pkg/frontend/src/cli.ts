#!/usr/bin/env node
/**
 * spinor-figures <fig1..fig6> --in <runs dir> --out <svg path>
 *
 * Renders one figure from the simulator's CSV outputs.  The input directory
 * is the root holding the named run subdirectories (runs/fig1a, runs/fig5,
 * ...); each verb documents which runs it needs by failing with the missing
 * path.  Exit codes: 0 ok, 2 bad usage or schema mismatch.
 */

import { FIGURE_IDS, FigureId, FigureSpec, render } from "./figures";
import { SchemaError } from "./csv";

function usage(): string {
  return (
    `usage: spinor-figures <${FIGURE_IDS.join("|")}> --in <dir> --out <path>`
  );
}

export function parseArgs(argv: string[]): FigureSpec {
  const [verb, ...rest] = argv;
  if (!verb || !(FIGURE_IDS as readonly string[]).includes(verb)) {
    throw new SchemaError(`unknown figure ${verb ?? "(none)"}\n${usage()}`);
  }
  let inDir: string | undefined;
  let outPath: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) {
      throw new SchemaError(`flag ${flag} needs a value\n${usage()}`);
    }
    if (flag === "--in") {
      inDir = value;
    } else if (flag === "--out") {
      outPath = value;
    } else {
      throw new SchemaError(`unknown flag ${flag}\n${usage()}`);
    }
  }
  if (!inDir || !outPath) {
    throw new SchemaError(`both --in and --out are required\n${usage()}`);
  }
  return { id: verb as FigureId, inDir, outPath };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const written = render(spec);
    console.log(written);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
