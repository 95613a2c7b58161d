/**
 * SVG panels from snapshot bundles: a cell scatter over the domain disk,
 * and one heatmap per field.  Pure string templating so output is
 * deterministic byte-for-byte for identical inputs.
 */

import { Bounds, FormatError, SnapshotBundle, SnapshotMeta, isActive, nodeXY } from "./format.js";

/**
 * Evenly spaced samples along the viridis map (dark purple -> yellow),
 * interpolated linearly in RGB.  Hand-rolled: a full color library is a
 * lot of dependency for one ramp.
 */
const VIRIDIS = [
  "#440154", "#481567", "#482677", "#453781", "#404788", "#39568c",
  "#33638d", "#2d708e", "#287d8e", "#238a8d", "#1f968b", "#20a387",
  "#29af7f", "#3cbb75", "#55c667", "#73d055", "#95d840", "#b8de29",
  "#dce319", "#fde725",
];

const VIRIDIS_RGB: Array<[number, number, number]> = VIRIDIS.map((hex) => [
  parseInt(hex.slice(1, 3), 16),
  parseInt(hex.slice(3, 5), 16),
  parseInt(hex.slice(5, 7), 16),
]);

/** RGB triple at ramp position t in [0, 1] (clamped). */
export function rampRgb(t: number): [number, number, number] {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (VIRIDIS_RGB.length - 1);
  const at = Math.min(Math.floor(pos), VIRIDIS_RGB.length - 2);
  const frac = pos - at;
  const a = VIRIDIS_RGB[at];
  const b = VIRIDIS_RGB[at + 1];
  return [
    Math.round(a[0] + frac * (b[0] - a[0])),
    Math.round(a[1] + frac * (b[1] - a[1])),
    Math.round(a[2] + frac * (b[2] - a[2])),
  ];
}

function rampColor(t: number): string {
  const [r, g, b] = rampRgb(t);
  return `rgb(${r},${g},${b})`;
}

/** Shared panel geometry; exported so tests can invert the layout. */
export const PANEL = {
  size: 560,   // total SVG width and height, px
  margin: 48,  // border around the plot area, px
};

const NEUTRAL = "#f2f2f2";   // outside the circular domain
const TIP_COLOR = "#c0392b";
const STALK_COLOR = "#2e6da4";

function plotSpan(): number {
  return PANEL.size - 2 * PANEL.margin;
}

/** Data coordinates (um, origin at the disk center) to pixel coordinates. */
export function dataToPixel(meta: SnapshotMeta, x: number, y: number): [number, number] {
  const span = plotSpan();
  const px = PANEL.margin + ((x + meta.R) / (2 * meta.R)) * span;
  const py = PANEL.margin + ((meta.R - y) / (2 * meta.R)) * span; // SVG y runs down
  return [px, py];
}

/** Inverse of dataToPixel, for checking rendered positions. */
export function pixelToData(meta: SnapshotMeta, px: number, py: number): [number, number] {
  const span = plotSpan();
  const x = ((px - PANEL.margin) / span) * 2 * meta.R - meta.R;
  const y = meta.R - ((py - PANEL.margin) / span) * 2 * meta.R;
  return [x, y];
}

function fmt(v: number): string {
  return v.toFixed(2);
}

function svgOpen(titleText: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${PANEL.size}" height="${PANEL.size}" viewBox="0 0 ${PANEL.size} ${PANEL.size}">`,
    `<rect width="${PANEL.size}" height="${PANEL.size}" fill="white"/>`,
    `<text x="${PANEL.margin}" y="${PANEL.margin - 16}" font-family="sans-serif" font-size="14">${titleText}</text>`,
  ];
}

function axes(meta: SnapshotMeta): string[] {
  const span = plotSpan();
  const x0 = PANEL.margin;
  const x1 = PANEL.margin + span;
  const y1 = PANEL.margin + span;
  const mid = PANEL.margin + span / 2;
  const out = [
    `<rect x="${x0}" y="${PANEL.margin}" width="${span}" height="${span}" fill="none" stroke="#999"/>`,
  ];
  const labels: Array<[number, string]> = [
    [x0, `-${meta.R}`], [mid, "0"], [x1, `${meta.R}`],
  ];
  for (const [px, text] of labels) {
    out.push(`<text x="${px}" y="${y1 + 18}" font-family="sans-serif" font-size="11" text-anchor="middle">${text}</text>`);
    out.push(`<text x="${x0 - 8}" y="${PANEL.size - px + 4}" font-family="sans-serif" font-size="11" text-anchor="end">${text}</text>`);
  }
  out.push(`<text x="${mid}" y="${y1 + 34}" font-family="sans-serif" font-size="11" text-anchor="middle">x (um)</text>`);
  return out;
}

function panelTitle(label: string, meta: SnapshotMeta): string {
  return `${label}  t=${meta.time_s} s  build ${meta.build}`;
}

function normalize(v: number, bounds: Bounds): number {
  const [lo, hi] = bounds;
  return hi > lo ? (v - lo) / (hi - lo) : 0.0; // flat color on an empty range
}

/** Ramp color string for a value under fixed bounds. */
export function heatColor(v: number, bounds: Bounds): string {
  return rampColor(normalize(v, bounds));
}

/** RGB triple for PNG rasterization of the same color scale. */
export function heatRgb(v: number, bounds: Bounds): [number, number, number] {
  return rampRgb(normalize(v, bounds));
}

export function renderFieldSvg(bundle: SnapshotBundle, name: string,
                               bounds: Bounds): string {
  const values = bundle.fields.get(name);
  if (values === undefined) {
    throw new FormatError(`${bundle.dir}: unknown field "${name}"`);
  }
  const meta = bundle.meta;
  const n = meta.grid_n;
  const cell = (plotSpan() * meta.h) / (2 * meta.R);
  const half = cell / 2;

  const out = svgOpen(panelTitle(name, meta));
  const span = plotSpan();
  out.push(`<rect x="${PANEL.margin}" y="${PANEL.margin}" width="${span}" height="${span}" fill="${NEUTRAL}"/>`);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (!isActive(meta, i, j)) continue;
      const [x, y] = nodeXY(meta, i, j);
      const [px, py] = dataToPixel(meta, x, y);
      const fill = heatColor(values[i * n + j], bounds);
      out.push(`<rect x="${fmt(px - half)}" y="${fmt(py - half)}" width="${fmt(cell)}" height="${fmt(cell)}" fill="${fill}"/>`);
    }
  }
  out.push(...axes(meta));
  out.push(...colorbar(bounds));
  out.push("</svg>");
  return out.join("\n") + "\n";
}

function colorbar(bounds: Bounds): string[] {
  const stops = 16;
  const x = PANEL.size - PANEL.margin + 14;
  const top = PANEL.margin;
  const height = plotSpan();
  const out = [
    `<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">`,
  ];
  for (let s = 0; s <= stops; s++) {
    const t = s / stops;
    out.push(`<stop offset="${(100 * t).toFixed(1)}%" stop-color="${rampColor(t)}"/>`);
  }
  out.push(`</linearGradient></defs>`);
  out.push(`<rect x="${x}" y="${top}" width="12" height="${height}" fill="url(#scale)" stroke="#999"/>`);
  const [lo, hi] = bounds;
  out.push(`<text x="${x - 2}" y="${top + height + 12}" font-family="sans-serif" font-size="10" text-anchor="start">${lo.toPrecision(3)}</text>`);
  out.push(`<text x="${x - 2}" y="${top - 5}" font-family="sans-serif" font-size="10" text-anchor="start">${hi.toPrecision(3)}</text>`);
  return out;
}

export function renderCellsSvg(bundle: SnapshotBundle): string {
  const meta = bundle.meta;
  const out = svgOpen(panelTitle("cells", meta));
  out.push(...axes(meta));

  const [cx, cy] = dataToPixel(meta, 0, 0);
  const [edge] = dataToPixel(meta, meta.R, 0);
  out.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(edge - cx)}" fill="none" stroke="#666"/>`);

  const arm = 5; // half-width of a tip cross, px
  for (const row of bundle.cells) {
    const [px, py] = dataToPixel(meta, row.x_um, row.y_um);
    if (row.kind === "stalk") {
      out.push(`<circle class="stalk" cx="${fmt(px)}" cy="${fmt(py)}" r="2.5" fill="${STALK_COLOR}"/>`);
    } else {
      out.push(`<path class="tip" d="M ${fmt(px - arm)} ${fmt(py)} L ${fmt(px + arm)} ${fmt(py)} M ${fmt(px)} ${fmt(py - arm)} L ${fmt(px)} ${fmt(py + arm)}" stroke="${TIP_COLOR}" stroke-width="2" fill="none"/>`);
    }
  }
  out.push("</svg>");
  return out.join("\n") + "\n";
}
