/**
 * Readers for the simulator's CSV artifacts.
 *
 * Every file starts with a '#'-prefixed header block ("# key: value" lines
 * carrying the scenario name, config hash and derived scales), followed by a
 * column-name row and comma-separated data rows.  The writer pins the float
 * format, never quotes and never emits embedded commas, so splitting on ','
 * is exact for this dialect.  All checks fail loudly with the offending file
 * or column in the message.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface Table {
  path: string;
  columns: string[];
  meta: Map<string, string>;
  rows: string[][];
}

export interface Snapshot {
  tMs: number;
  values: number[];
}

export interface DensityBlocks {
  path: string;
  meta: Map<string, string>;
  xUm: number[];
  blocks: Map<string, Snapshot[]>;
}

function readLines(path: string): { comments: string[]; data: string[] } {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SchemaError(`missing input file ${path}`);
  }
  if (text.trim().length === 0) {
    throw new SchemaError(`input file ${path} is empty`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    i += 1;
  }
  return { comments: lines.slice(0, i), data: lines.slice(i) };
}

function parseMeta(comments: string[]): Map<string, string> {
  const meta = new Map<string, string>();
  for (const line of comments) {
    const match = /^#\s*([^:]+):\s*(.*)$/.exec(line);
    if (match) {
      meta.set(match[1].trim(), match[2].trim());
    }
  }
  return meta;
}

export function readTable(path: string, required: string[] = []): Table {
  const { comments, data } = readLines(path);
  if (data.length < 2) {
    throw new SchemaError(`input file ${path} has no data rows`);
  }
  const columns = data[0].split(",");
  for (const name of required) {
    if (!columns.includes(name)) {
      throw new SchemaError(`${path} is missing column ${name}`);
    }
  }
  const rows = data.slice(1).map((line) => line.split(","));
  return { path, columns, meta: parseMeta(comments), rows };
}

export function column(table: Table, name: string): number[] {
  const j = table.columns.indexOf(name);
  if (j < 0) {
    throw new SchemaError(`${table.path} is missing column ${name}`);
  }
  return table.rows.map((row) => Number(row[j]));
}

export function metaNumber(table: Table, key: string): number {
  const raw = table.meta.get(key);
  const value = raw === undefined ? NaN : Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`${table.path} is missing header entry ${key}`);
  }
  return value;
}

export function readDensities(path: string): DensityBlocks {
  const { comments, data } = readLines(path);
  if (data.length === 0) {
    throw new SchemaError(`input file ${path} has no data rows`);
  }
  const gridCells = data[0].split(",");
  if (gridCells[0] !== "x_um") {
    throw new SchemaError(`${path} is missing the x_um grid row`);
  }
  const xUm = gridCells.slice(1).map(Number);
  const blocks = new Map<string, Snapshot[]>();
  for (const line of data.slice(1)) {
    const cells = line.split(",");
    const at = cells[0].indexOf("@");
    if (at < 0) {
      throw new SchemaError(`${path} has a snapshot row without a block@time label`);
    }
    const name = cells[0].slice(0, at);
    const tMs = Number(cells[0].slice(at + 1));
    const values = cells.slice(1).map(Number);
    if (values.length !== xUm.length) {
      throw new SchemaError(
        `${path} snapshot row for ${name} has ${values.length} values, grid has ${xUm.length}`,
      );
    }
    const list = blocks.get(name) ?? [];
    list.push({ tMs, values });
    blocks.set(name, list);
  }
  if (!blocks.has("total")) {
    throw new SchemaError(`${path} is missing the total density block`);
  }
  return { path, meta: parseMeta(comments), xUm, blocks };
}
