/** Synthetic snapshot directories for tests that should not need the simulator. */

import * as fs from "node:fs";
import * as path from "node:path";

import type { SnapshotMeta } from "../src/format.js";

export interface SyntheticSpec {
  step?: number;
  time_s?: number;
  gridN?: number;
  h?: number;
  R?: number;
  build?: string;
  /** field name -> row-major values (defaults to zeros) */
  fields?: Record<string, number[] | Float64Array>;
  /** raw CSV body lines after the header */
  cellLines?: string[];
}

export function writeSnapshot(dir: string, spec: SyntheticSpec = {}): SnapshotMeta {
  const gridN = spec.gridN ?? 5;
  const h = spec.h ?? 10;
  const R = spec.R ?? 20;
  const fields = spec.fields ?? { c_V: new Float64Array(gridN * gridN) };
  const meta: SnapshotMeta = {
    grid_n: gridN,
    h,
    R,
    step: spec.step ?? 0,
    time_s: spec.time_s ?? 0,
    fields: Object.keys(fields),
    build: spec.build ?? "0.1.0-test",
  };
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, "meta.json"), JSON.stringify(meta, null, 2) + "\n");
  for (const [name, values] of Object.entries(fields)) {
    const buf = Buffer.alloc(gridN * gridN * 8);
    for (let k = 0; k < gridN * gridN; k++) {
      buf.writeDoubleLE(values[k] ?? 0, k * 8);
    }
    fs.writeFileSync(path.join(dir, `${name}.f64`), buf);
  }
  const lines = ["step,time_s,kind,index,x_um,y_um", ...(spec.cellLines ?? [])];
  fs.writeFileSync(path.join(dir, "cells.csv"), lines.join("\n") + "\n");
  return meta;
}
