/**
 * The three figure panels, each a pure function from file text to an SVG
 * string:
 *
 *  - k-map heatmap of a band's values over the Brillouin zone, with the
 *    hexagonal zone boundary drawn from the reciprocal vectors in the header;
 *  - delay-scan curve sigma(tau), optionally overlaid with a normalized
 *    perturbation-theory reference;
 *  - time traces sigma(t), one colored line per dephasing-time column.
 */

import { TRACE_COLORS, viridis } from "./colormap.js";
import { SchemaError } from "./errors.js";
import { hexagonCorners, wrapToZone } from "./geometry.js";
import { KMap, metaVector, parseKmap, parseSeries, Series } from "./parse.js";
import { axes, document, el, linearScale, polyline } from "./svg.js";

const WIDTH = 480;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 24, top: 24, bottom: 48 };

function requireColumn(series: Series, name: string): number[] {
  const column = series.columns[name];
  if (column === undefined) throw new SchemaError(`missing column '${name}'`);
  return column;
}

/** Heatmap of values[.][band] over the zone, hexagon boundary overlaid. */
export function renderKmapPanel(text: string, band = -1): string {
  const kmap: KMap = parseKmap(text);
  if (kmap.kpoints.length === 0) throw new SchemaError("k-map holds no data rows");
  const b1 = metaVector(kmap.meta, "b1_inv_angstrom");
  const b2 = metaVector(kmap.meta, "b2_inv_angstrom");
  const nbands = kmap.values[0].length;
  const chosen = band < 0 ? nbands + band : band;
  if (chosen < 0 || chosen >= nbands) throw new SchemaError(`band ${band} not in file (${nbands} bands)`);

  const corners = hexagonCorners(b1, b2);
  const radius = Math.max(...corners.map(([x, y]) => Math.hypot(x, y)));
  const span = Math.min(WIDTH - MARGIN.left - MARGIN.right, HEIGHT - MARGIN.top - MARGIN.bottom);
  const sx = linearScale(-1.15 * radius, 1.15 * radius, MARGIN.left, MARGIN.left + span);
  const sy = linearScale(-1.15 * radius, 1.15 * radius, MARGIN.top + span, MARGIN.top);

  const values = kmap.values.map((v) => v[chosen]);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const scale = hi - lo > 0 ? (v: number) => (v - lo) / (hi - lo) : () => 0.5;
  // marker size from the grid pitch so neighboring cells tile without gaps
  const pitch = Math.hypot(b1[0], b1[1]) / Math.sqrt(kmap.kpoints.length);
  const side = Math.abs(sx(pitch) - sx(0)) * 1.25;

  const cells = kmap.kpoints.map((k, i) => {
    const [kx, ky] = wrapToZone(k, b1, b2);
    return el("rect", {
      x: (sx(kx) - side / 2).toFixed(2),
      y: (sy(ky) - side / 2).toFixed(2),
      width: side.toFixed(2),
      height: side.toFixed(2),
      fill: viridis(scale(values[i])),
    });
  });
  const outline = corners.concat([corners[0]]);
  const hexagon = polyline(outline.map(([x]) => sx(x)), outline.map(([, y]) => sy(y)),
                           "#d62728", 1.5);
  const label = el("text", { x: WIDTH / 2, y: HEIGHT - 10, "text-anchor": "middle",
                             "font-size": 12 },
                   `band ${chosen}, range [${lo.toPrecision(3)}, ${hi.toPrecision(3)}]`);
  return document(WIDTH, HEIGHT, [...cells, hexagon, label]);
}

function curvePanel(columns: { x: number[]; y: number[]; color: string; label: string }[],
                    xlabel: string, ylabel: string): string {
  const allX = columns.flatMap((c) => c.x);
  const allY = columns.flatMap((c) => c.y);
  const sx = linearScale(Math.min(...allX), Math.max(...allX),
                         MARGIN.left, WIDTH - MARGIN.right);
  const sy = linearScale(Math.min(...allY), Math.max(...allY),
                         HEIGHT - MARGIN.bottom, MARGIN.top);
  const body = axes(sx, sy, [MARGIN.left, WIDTH - MARGIN.right],
                    [HEIGHT - MARGIN.bottom, MARGIN.top], xlabel, ylabel);
  columns.forEach((c, i) => {
    body.push(polyline(c.x.map(sx), c.y.map(sy), c.color));
    body.push(el("text", { x: WIDTH - MARGIN.right, y: MARGIN.top + 14 * (i + 1),
                           "text-anchor": "end", "font-size": 11, fill: c.color }, c.label));
  });
  return document(WIDTH, HEIGHT, body);
}

function normalized(values: number[]): number[] {
  const peak = Math.max(...values.map(Math.abs));
  return peak > 0 ? values.map((v) => v / peak) : values.slice();
}

/** sigma(tau) from a delay scan, plus an optional normalized reference overlay. */
export function renderDelayScanPanel(scanText: string, referenceText?: string): string {
  const scan = parseSeries(scanText);
  const curves = [{
    x: requireColumn(scan, "tau_fs"),
    y: normalized(requireColumn(scan, "sigma")),
    color: "#ff7f0e",
    label: "propagation",
  }];
  if (referenceText !== undefined) {
    const reference = parseSeries(referenceText);
    curves.push({
      x: requireColumn(reference, "tau_fs"),
      y: normalized(requireColumn(reference, "sigma")),
      color: "#000000",
      label: "perturbation theory",
    });
  }
  return curvePanel(curves, "delay (fs)", "sigma (normalized)");
}

/** sigma(t) traces: every non-time column drawn in its own color. */
export function renderTracePanel(text: string): string {
  const series = parseSeries(text);
  const t = requireColumn(series, "t_fs");
  const names = series.names.filter((n) => n !== "t_fs");
  if (names.length === 0) throw new SchemaError("no trace columns besides t_fs");
  const curves = names.map((name, i) => ({
    x: t,
    y: series.columns[name],
    color: TRACE_COLORS[i % TRACE_COLORS.length],
    label: name,
  }));
  return curvePanel(curves, "time (fs)", "sigma");
}
