import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { SchemaError } from "../src/errors.js";
import { metaVector, parseKmap, parseSeries } from "../src/parse.js";

const read = (name: string) => readFileSync(new URL(`../samples/${name}`, import.meta.url), "utf8");

describe("parseSeries", () => {
  it("reads provenance, names and columns from a shipped scan", () => {
    const series = parseSeries(read("sigma_tau.csv"));
    expect(series.meta.grid).toBe("24x24");
    expect(series.meta.config_hash).toMatch(/^[0-9a-f]{16}$/);
    expect(series.names).toEqual(["tau_fs", "sigma"]);
    expect(series.columns.tau_fs.length).toBe(30);
    expect(series.columns.tau_fs[0]).toBeCloseTo(0.2, 12);
    expect(series.columns.tau_fs.every((v, i, a) => i === 0 || v > a[i - 1])).toBe(true);
  });

  it("reads the multi-column switch trace", () => {
    const series = parseSeries(read("sigma_t.csv"));
    expect(series.names).toEqual(["t_fs", "sigma_t2_inf", "sigma_t2_20", "sigma_t2_7"]);
    expect(series.meta.polarizations).toBe("y,x,y,x");
  });

  it("rejects ragged rows", () => {
    expect(() => parseSeries("a,b\n1,2\n3\n")).toThrow(SchemaError);
  });

  it("rejects non-numeric cells and missing headers", () => {
    expect(() => parseSeries("a,b\n1,oops\n")).toThrow(SchemaError);
    expect(() => parseSeries("# only = meta\n")).toThrow(SchemaError);
  });
});

describe("parseKmap", () => {
  it("reads k-points and per-band values from a shipped population map", () => {
    const kmap = parseKmap(read("pop_stage2_kmap.csv"));
    expect(kmap.kpoints.length).toBe(24 * 24);
    expect(kmap.values[0].length).toBe(2);
    for (const row of kmap.values) {
      for (const v of row) {
        expect(v).toBeGreaterThanOrEqual(-1e-9);
        expect(v).toBeLessThanOrEqual(1 + 1e-9);
      }
    }
  });

  it("rejects a wrong column header", () => {
    expect(() => parseKmap("kx ky value\n0 0 1\n")).toThrow(SchemaError);
  });

  it("rejects incomplete band blocks", () => {
    const good = "kx ky band value\n0 0 0 1\n0 0 1 2\n";
    expect(parseKmap(good).values[0]).toEqual([1, 2]);
    expect(() => parseKmap(good + "1 0 0 3\n")).toThrow(SchemaError);
  });

  it("exposes reciprocal vectors through metaVector", () => {
    const kmap = parseKmap(read("pop_stage1_kmap.csv"));
    const b1 = metaVector(kmap.meta, "b1_inv_angstrom");
    const b2 = metaVector(kmap.meta, "b2_inv_angstrom");
    // |b1| = |b2| = 4 pi / (a sqrt(3)) for a = 2.5 A
    const expected = (4 * Math.PI) / (2.5 * Math.sqrt(3));
    expect(Math.hypot(...b1)).toBeCloseTo(expected, 6);
    expect(Math.hypot(...b2)).toBeCloseTo(expected, 6);
    expect(() => metaVector(kmap.meta, "absent")).toThrow(SchemaError);
  });
});
