/**
 * PNG rasterization of the same panels the SVG path produces.  The raster
 * format skips text annotation (no font rendering here); the SVG output is
 * the annotated one.
 */

import { PNG } from "pngjs";

import { Bounds, FormatError, SnapshotBundle, isActive } from "./format.js";
import { heatRgb } from "./render.js";

const NEUTRAL_RGB: [number, number, number] = [242, 242, 242];
const TIP_RGB: [number, number, number] = [192, 57, 43];
const STALK_RGB: [number, number, number] = [46, 109, 164];
const BAR_GAP = 8;   // px between plot and colorbar
const BAR_WIDTH = 16;

function pixelScale(gridN: number): number {
  return Math.max(1, Math.floor(512 / gridN));
}

function put(png: PNG, col: number, row: number, rgb: [number, number, number]): void {
  if (col < 0 || row < 0 || col >= png.width || row >= png.height) return;
  const at = (row * png.width + col) * 4;
  png.data[at] = rgb[0];
  png.data[at + 1] = rgb[1];
  png.data[at + 2] = rgb[2];
  png.data[at + 3] = 255;
}

export function renderFieldPng(bundle: SnapshotBundle, name: string,
                               bounds: Bounds): Buffer {
  const values = bundle.fields.get(name);
  if (values === undefined) {
    throw new FormatError(`${bundle.dir}: unknown field "${name}"`);
  }
  const meta = bundle.meta;
  const n = meta.grid_n;
  const s = pixelScale(n);
  const side = n * s;
  const png = new PNG({ width: side + BAR_GAP + BAR_WIDTH, height: side });

  for (let row = 0; row < side; row++) {
    for (let col = 0; col < side; col++) {
      // leftmost pixel column is x = -R, topmost pixel row is y = +R
      const i = (n - 1) - Math.floor(col / s);
      const j = Math.floor(row / s);
      const rgb = isActive(meta, i, j)
        ? heatRgb(values[i * n + j], bounds)
        : NEUTRAL_RGB;
      put(png, col, row, rgb);
    }
    const t = 1 - row / (side - 1);
    const barRgb = heatRgb(bounds[0] + t * (bounds[1] - bounds[0]), bounds);
    for (let col = side + BAR_GAP; col < png.width; col++) {
      put(png, col, row, barRgb);
    }
  }
  return PNG.sync.write(png);
}

export function renderCellsPng(bundle: SnapshotBundle): Buffer {
  const meta = bundle.meta;
  const n = meta.grid_n;
  const s = pixelScale(n);
  const side = n * s;
  const png = new PNG({ width: side, height: side });
  png.data.fill(255);

  const perPixel = (2 * meta.R) / side; // data um per raster pixel
  for (let row = 0; row < side; row++) {
    for (let col = 0; col < side; col++) {
      const x = -meta.R + (col + 0.5) * perPixel;
      const y = meta.R - (row + 0.5) * perPixel;
      if (Math.abs(Math.hypot(x, y) - meta.R) <= perPixel) {
        put(png, col, row, [102, 102, 102]); // domain outline
      }
    }
  }

  for (const cell of bundle.cells) {
    const col = Math.round((cell.x_um + meta.R) / perPixel);
    const row = Math.round((meta.R - cell.y_um) / perPixel);
    if (cell.kind === "stalk") {
      for (let dr = -2; dr <= 2; dr++) {
        for (let dc = -2; dc <= 2; dc++) {
          if (dr * dr + dc * dc <= 4) put(png, col + dc, row + dr, STALK_RGB);
        }
      }
    } else {
      for (let d = -4; d <= 4; d++) {
        put(png, col + d, row, TIP_RGB);
        put(png, col, row + d, TIP_RGB);
      }
    }
  }
  return PNG.sync.write(png);
}
