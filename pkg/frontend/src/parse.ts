/**
 * Readers for the two simulator output formats.
 *
 * Both start with '#'-prefixed provenance lines ("# key = value"), then a
 * column-name row, then numeric rows.  Series files are comma separated;
 * k-map files hold space-separated "kx ky band value" rows, band-major
 * within each k-point.
 */

import { SchemaError } from "./errors.js";

export interface Series {
  meta: Record<string, string>;
  names: string[];
  /** columns[name][i] is row i of that column. */
  columns: Record<string, number[]>;
}

export interface KMap {
  meta: Record<string, string>;
  /** (nk) pairs [kx, ky] in inverse Angstrom. */
  kpoints: [number, number][];
  /** values[k][band]. */
  values: number[][];
}

function splitMeta(lines: string[]): { meta: Record<string, string>; body: string[] } {
  const meta: Record<string, string> = {};
  const body: string[] = [];
  for (const line of lines) {
    if (!line.trim()) continue;
    if (line.startsWith("#")) {
      const text = line.slice(1).trim();
      const eq = text.indexOf("=");
      if (eq >= 0) meta[text.slice(0, eq).trim()] = text.slice(eq + 1).trim();
      continue;
    }
    body.push(line);
  }
  return { meta, body };
}

function toNumber(token: string, context: string): number {
  const value = Number(token);
  if (token.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`${context}: not a number: '${token}'`);
  }
  return value;
}

export function parseSeries(text: string): Series {
  const { meta, body } = splitMeta(text.split("\n"));
  if (body.length === 0) throw new SchemaError("no column header found in series file");
  const names = body[0].split(",").map((t) => t.trim());
  const columns: Record<string, number[]> = {};
  for (const name of names) columns[name] = [];
  for (const line of body.slice(1)) {
    const tokens = line.split(",");
    if (tokens.length !== names.length) {
      throw new SchemaError("row width does not match the column header");
    }
    tokens.forEach((tok, i) => columns[names[i]].push(toNumber(tok, "series row")));
  }
  return { meta, names, columns };
}

export function parseKmap(text: string): KMap {
  const { meta, body } = splitMeta(text.split("\n"));
  if (body.length === 0) throw new SchemaError("no column header found in k-map file");
  if (body[0].split(/\s+/).filter(Boolean).join(" ") !== "kx ky band value") {
    throw new SchemaError("k-map column header must be 'kx ky band value'");
  }
  const rows: number[][] = body.slice(1).map((line) => {
    const tokens = line.split(/\s+/).filter(Boolean);
    if (tokens.length !== 4) throw new SchemaError("k-map rows must hold 'kx ky band value'");
    return tokens.map((t) => toNumber(t, "k-map row"));
  });
  if (rows.length === 0) return { meta, kpoints: [], values: [] };
  const nbands = Math.max(...rows.map((r) => r[2])) + 1;
  if (!Number.isInteger(nbands) || rows.length % nbands !== 0) {
    throw new SchemaError("incomplete band blocks in k-map file");
  }
  const kpoints: [number, number][] = [];
  const values: number[][] = [];
  for (let i = 0; i < rows.length; i += nbands) {
    kpoints.push([rows[i][0], rows[i][1]]);
    values.push(rows.slice(i, i + nbands).map((r) => r[3]));
  }
  return { meta, kpoints, values };
}

/** Parse a two-component vector stored in a meta value as "x y". */
export function metaVector(meta: Record<string, string>, key: string): [number, number] {
  const raw = meta[key];
  if (raw === undefined) throw new SchemaError(`missing header entry '${key}'`);
  const tokens = raw.split(/\s+/).filter(Boolean);
  if (tokens.length !== 2) throw new SchemaError(`header entry '${key}' is not a 2-vector`);
  return [toNumber(tokens[0], key), toNumber(tokens[1], key)];
}
