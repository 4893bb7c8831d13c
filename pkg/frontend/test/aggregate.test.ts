import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { groupSeries, mean, sampleStd } from "../src/aggregate.js";
import { readTable } from "../src/csv.js";

const DATA = fileURLToPath(new URL("../testdata", import.meta.url));

interface GoldenEntry {
  method: string;
  sweep: string;
  mean: number;
  std: number;
  n: number;
}

const golden: Record<string, GoldenEntry[]> = JSON.parse(
  fs.readFileSync(path.join(DATA, "golden_aggregates.json"), "utf8"),
);

describe("statistics", () => {
  it("mean and sample std on hand values", () => {
    expect(mean([1, 2, 3])).toBe(2);
    expect(sampleStd([1, 2, 3])).toBeCloseTo(1, 12);
    expect(sampleStd([5])).toBe(0);
    expect(sampleStd([])).toBe(0);
  });
});

describe("golden aggregates", () => {
  // reference values were computed from the same CSVs with an independent
  // implementation; every figure metric must reproduce them exactly
  for (const [key, entries] of Object.entries(golden)) {
    it(key, () => {
      const [experiment, metric] = key.split("/") as [string, string];
      const table = readTable(path.join(DATA, `results_${experiment}.csv`));
      const series = groupSeries(table, {
        x: "sweep_value",
        y: metric,
        label: "method",
      });
      const got = new Map<string, { mean: number; std: number; n: number }>();
      for (const s of series) {
        for (const p of s.points) {
          got.set(`${s.label}@${p.x}`, { mean: p.mean, std: p.std, n: p.n });
        }
      }
      expect(got.size).toBe(entries.length);
      for (const e of entries) {
        const match = got.get(`${e.method}@${Number(e.sweep)}`);
        expect(match, `${e.method} at ${e.sweep}`).toBeDefined();
        expect(match!.n).toBe(e.n);
        expect(match!.mean).toBeCloseTo(e.mean, 9);
        expect(match!.std).toBeCloseTo(e.std, 9);
      }
    });
  }
});

describe("grouping", () => {
  it("orders series by label and points by x", () => {
    const table = readTable(path.join(DATA, "results_algo_compare.csv"));
    const series = groupSeries(table, {
      x: "sweep_value",
      y: "total_qoe",
      label: "method",
    });
    const labels = series.map((s) => s.label);
    expect(labels).toEqual([...labels].sort());
    for (const s of series) {
      const xs = s.points.map((p) => p.x);
      expect(xs).toEqual([...xs].sort((a, b) => a - b));
      for (const p of s.points) expect(p.n).toBe(3);
    }
  });

  it("rejects a non-numeric metric column", () => {
    const table = readTable(path.join(DATA, "results_algo_compare.csv"));
    expect(() =>
      groupSeries(table, { x: "sweep_value", y: "method", label: "experiment" }),
    ).toThrowError(/non-numeric/);
  });
});
