#!/usr/bin/env node
/**
 * render <run_dir> [--fields c_V,f_B ...] [--steps 0,400 ...]
 *                  [--format svg|png] [--out dir]
 *
 * Renders a cell panel plus one heatmap per requested field for each
 * selected snapshot of a run directory.  Color scales are fixed per field
 * across the whole run, so panels at different times are comparable.
 * Output goes to <run_dir>/render by default; the snapshot inputs are
 * never written to.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { FormatError, SnapshotBundle, fieldBounds, listSnapshotDirs,
         loadSnapshot } from "./format.js";
import { renderCellsPng, renderFieldPng } from "./png.js";
import { renderCellsSvg, renderFieldSvg } from "./render.js";

const USAGE =
  "usage: angiosim-view render <run_dir> [--fields a,b] [--steps 0,400] " +
  "[--format svg|png] [--out dir]";

function splitList(values: string[] | undefined): string[] | undefined {
  if (values === undefined) return undefined;
  const out = values.flatMap((v) => v.split(",")).filter((v) => v.length > 0);
  return out.length > 0 ? out : undefined;
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        fields: { type: "string", multiple: true },
        steps: { type: "string", multiple: true },
        format: { type: "string", default: "svg" },
        out: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  const { positionals, values } = parsed;
  if (positionals.length !== 2 || positionals[0] !== "render") {
    console.error(USAGE);
    return 2;
  }
  if (values.format !== "svg" && values.format !== "png") {
    console.error(`error: unknown format "${values.format}" (svg or png)`);
    return 2;
  }
  let stepFilter: number[] | undefined;
  try {
    stepFilter = splitList(values.steps)?.map((tok) => {
      const n = Number(tok);
      if (!Number.isInteger(n) || n < 0) {
        throw new FormatError(`bad --steps entry "${tok}"`);
      }
      return n;
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }

  try {
    return render(positionals[1], {
      fields: splitList(values.fields),
      steps: stepFilter,
      format: values.format,
      out: values.out,
    });
  } catch (err) {
    if (err instanceof FormatError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

interface RenderOptions {
  fields?: string[];
  steps?: number[];
  format: "svg" | "png";
  out?: string;
}

function render(runDir: string, opts: RenderOptions): number {
  const dirs = listSnapshotDirs(runDir);
  if (dirs.length === 0) {
    throw new FormatError(`${runDir}: no step_* snapshot directories`);
  }
  // the color-scale pre-pass always covers the full run, not just the
  // selected steps, so a filtered render matches the unfiltered one
  const bundles = dirs.map(loadSnapshot);
  const fields = opts.fields ?? bundles[0].meta.fields;
  for (const name of fields) {
    if (!bundles[0].fields.has(name)) {
      throw new FormatError(`unknown field "${name}"; run has ${bundles[0].meta.fields.join(", ")}`);
    }
  }
  const bounds = fieldBounds(bundles, fields);

  let selected: SnapshotBundle[] = bundles;
  if (opts.steps !== undefined) {
    const want = new Set(opts.steps);
    selected = bundles.filter((b) => want.has(b.meta.step));
    const have = new Set(selected.map((b) => b.meta.step));
    for (const step of want) {
      if (!have.has(step)) throw new FormatError(`run has no snapshot for step ${step}`);
    }
  }

  const outRoot = opts.out ?? path.join(runDir, "render");
  let written = 0;
  for (const bundle of selected) {
    const dir = path.join(outRoot, `step_${bundle.meta.step}`);
    fs.mkdirSync(dir, { recursive: true });
    const panels: Array<[string, Buffer | string]> = [];
    if (opts.format === "svg") {
      panels.push(["cells.svg", renderCellsSvg(bundle)]);
      for (const name of fields) {
        panels.push([`${name}.svg`, renderFieldSvg(bundle, name, bounds.get(name)!)]);
      }
    } else {
      panels.push(["cells.png", renderCellsPng(bundle)]);
      for (const name of fields) {
        panels.push([`${name}.png`, renderFieldPng(bundle, name, bounds.get(name)!)]);
      }
    }
    for (const [file, payload] of panels) {
      fs.writeFileSync(path.join(dir, file), payload);
      written += 1;
    }
    console.log(`step ${bundle.meta.step}: ${panels.length} panels -> ${dir}`);
  }
  console.log(`wrote ${written} files under ${outRoot}`);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("angiosim-view")) {
  process.exit(main(process.argv.slice(2)));
}
