/**
 * Reading and validating simulator snapshot directories.
 *
 * A run directory looks like:
 *
 *   out/
 *     step_0/
 *       meta.json          header: grid size, spacing, domain radius, step, time
 *       c_V.f64 ...        one raw little-endian float64 array per field, row-major n*n
 *       cells.csv          step,time_s,kind,index,x_um,y_um
 *     step_400/ ...
 *     summary.json
 *
 * Everything here is read-only; renderers consume the returned bundles.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export class FormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FormatError";
  }
}

export interface SnapshotMeta {
  grid_n: number;
  h: number;      // grid spacing, um
  R: number;      // domain radius, um
  step: number;
  time_s: number;
  fields: string[];
  build: string;
}

export type CellKind = "tip" | "stalk";

export interface CellRow {
  step: number;
  time_s: number;
  kind: CellKind;
  index: number;
  x_um: number;
  y_um: number;
}

export interface SnapshotBundle {
  dir: string;
  meta: SnapshotMeta;
  fields: Map<string, Float64Array>;
  cells: CellRow[];
}

function requireNumber(obj: Record<string, unknown>, key: string, file: string): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new FormatError(`${file}: missing or non-numeric "${key}"`);
  }
  return v;
}

export function readMeta(dir: string): SnapshotMeta {
  const file = path.join(dir, "meta.json");
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(file, "utf8"));
  } catch (err) {
    throw new FormatError(`${file}: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new FormatError(`${file}: expected a JSON object`);
  }
  const obj = doc as Record<string, unknown>;
  const fields = obj.fields;
  if (!Array.isArray(fields) || fields.some((f) => typeof f !== "string")) {
    throw new FormatError(`${file}: "fields" must be an array of names`);
  }
  if (typeof obj.build !== "string") {
    throw new FormatError(`${file}: missing "build" identifier`);
  }
  return {
    grid_n: requireNumber(obj, "grid_n", file),
    h: requireNumber(obj, "h", file),
    R: requireNumber(obj, "R", file),
    step: requireNumber(obj, "step", file),
    time_s: requireNumber(obj, "time_s", file),
    fields: fields as string[],
    build: obj.build,
  };
}

/** Read one field payload; the byte length must match the header exactly. */
export function readField(dir: string, name: string, gridN: number): Float64Array {
  const file = path.join(dir, `${name}.f64`);
  const buf = fs.readFileSync(file);
  const expected = gridN * gridN * 8;
  if (buf.length !== expected) {
    throw new FormatError(
      `${file}: payload is ${buf.length} bytes, header implies ${expected}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.length);
  const out = new Float64Array(gridN * gridN);
  for (let k = 0; k < out.length; k++) {
    out[k] = view.getFloat64(k * 8, true); // little-endian on every platform
  }
  return out;
}

const CELLS_HEADER = "step,time_s,kind,index,x_um,y_um";

export function parseCells(text: string, file = "cells.csv"): CellRow[] {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines[0] !== CELLS_HEADER) {
    throw new FormatError(`${file}: bad header "${lines[0] ?? ""}"`);
  }
  const rows: CellRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 6) {
      throw new FormatError(`${file}:${i + 1}: expected 6 columns, got ${parts.length}`);
    }
    const kind = parts[2];
    if (kind !== "tip" && kind !== "stalk") {
      throw new FormatError(`${file}:${i + 1}: unknown cell kind "${kind}"`);
    }
    const step = Number(parts[0]);
    const time = Number(parts[1]);
    const index = Number(parts[3]);
    const x = Number(parts[4]);
    const y = Number(parts[5]);
    if ([step, time, index, x, y].some((v) => Number.isNaN(v))) {
      throw new FormatError(`${file}:${i + 1}: non-numeric value in "${lines[i]}"`);
    }
    rows.push({ step, time_s: time, kind, index, x_um: x, y_um: y });
  }
  return rows;
}

export function readCells(dir: string): CellRow[] {
  const file = path.join(dir, "cells.csv");
  return parseCells(fs.readFileSync(file, "utf8"), file);
}

/** Load one snapshot directory and cross-check its pieces against each other. */
export function loadSnapshot(dir: string): SnapshotBundle {
  const meta = readMeta(dir);
  const fields = new Map<string, Float64Array>();
  for (const name of meta.fields) {
    fields.set(name, readField(dir, name, meta.grid_n));
  }
  const cells = readCells(dir);
  for (const row of cells) {
    if (row.step !== meta.step) {
      throw new FormatError(
        `${dir}: cells.csv row at step ${row.step} inside a step-${meta.step} snapshot`);
    }
  }
  return { dir, meta, fields, cells };
}

/** Node position in data coordinates (um); index [i][j] maps to ((k-i)h, (k-j)h). */
export function nodeXY(meta: SnapshotMeta, i: number, j: number): [number, number] {
  const k = (meta.grid_n - 1) / 2;
  return [(k - i) * meta.h, (k - j) * meta.h];
}

/** Whether a node lies inside the circular domain (boundary included). */
export function isActive(meta: SnapshotMeta, i: number, j: number): boolean {
  const [x, y] = nodeXY(meta, i, j);
  return x * x + y * y <= meta.R * meta.R;
}

/** step_* subdirectories of a run, ordered by step number. */
export function listSnapshotDirs(runDir: string): string[] {
  let entries: fs.Dirent[];
  try {
    entries = fs.readdirSync(runDir, { withFileTypes: true });
  } catch (err) {
    throw new FormatError(`${runDir}: ${(err as Error).message}`);
  }
  const steps: Array<[number, string]> = [];
  for (const ent of entries) {
    const m = /^step_(\d+)$/.exec(ent.name);
    if (m && ent.isDirectory()) {
      steps.push([Number(m[1]), path.join(runDir, ent.name)]);
    }
  }
  steps.sort((a, b) => a[0] - b[0]);
  return steps.map(([, p]) => p);
}

export type Bounds = [number, number];

/**
 * Per-field [min, max] over a whole set of bundles, so one field shares a
 * color scale across every snapshot it appears in.
 */
export function fieldBounds(bundles: SnapshotBundle[], names: string[]): Map<string, Bounds> {
  const out = new Map<string, Bounds>();
  for (const name of names) {
    let lo = Infinity;
    let hi = -Infinity;
    for (const bundle of bundles) {
      const values = bundle.fields.get(name);
      if (values === undefined) {
        throw new FormatError(`${bundle.dir}: field "${name}" not in snapshot`);
      }
      const n = bundle.meta.grid_n;
      for (let i = 0; i < n; i++) {
        for (let j = 0; j < n; j++) {
          if (!isActive(bundle.meta, i, j)) continue;
          const v = values[i * n + j];
          if (v < lo) lo = v;
          if (v > hi) hi = v;
        }
      }
    }
    out.set(name, [lo, hi]);
  }
  return out;
}
