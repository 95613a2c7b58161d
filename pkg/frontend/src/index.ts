export { FormatError, fieldBounds, isActive, listSnapshotDirs, loadSnapshot,
         nodeXY, parseCells, readCells, readField, readMeta } from "./format.js";
export type { Bounds, CellKind, CellRow, SnapshotBundle, SnapshotMeta } from "./format.js";
export { PANEL, dataToPixel, heatColor, heatRgb, pixelToData, rampRgb,
         renderCellsSvg, renderFieldSvg } from "./render.js";
export { renderCellsPng, renderFieldPng } from "./png.js";
export { main } from "./cli.js";
