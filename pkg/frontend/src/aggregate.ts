import { numeric, type Table } from "./csv.js";

export interface SeriesPoint {
  x: number;
  mean: number;
  std: number; // sample standard deviation, 0 when a single drop
  n: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export function mean(values: readonly number[]): number {
  let s = 0;
  for (const v of values) s += v;
  return s / values.length;
}

export function sampleStd(values: readonly number[]): number {
  if (values.length < 2) return 0;
  const m = mean(values);
  let s = 0;
  for (const v of values) s += (v - m) * (v - m);
  return Math.sqrt(s / (values.length - 1));
}

export interface GroupSpec {
  x: string; // column giving the x position
  y: string; // column aggregated over drops
  label: string; // column splitting rows into series
}

/**
 * Collapse drop-level rows into one series per label value: points keyed by
 * the x column carry mean, sample std and drop count of the y column.
 * Ordering is deterministic: series by label, points by x.
 */
export function groupSeries(table: Table, spec: GroupSpec): Series[] {
  const buckets = new Map<string, Map<number, number[]>>();
  for (const row of table.rows) {
    const label = row[spec.label];
    if (label === undefined) {
      throw new Error(`${table.path}: missing column(s) ${spec.label}`);
    }
    const x = numeric(row, spec.x, table.path);
    const y = numeric(row, spec.y, table.path);
    let byX = buckets.get(label);
    if (!byX) {
      byX = new Map();
      buckets.set(label, byX);
    }
    const vals = byX.get(x);
    if (vals) vals.push(y);
    else byX.set(x, [y]);
  }
  const series: Series[] = [];
  for (const label of [...buckets.keys()].sort()) {
    const byX = buckets.get(label)!;
    const points = [...byX.keys()]
      .sort((a, b) => a - b)
      .map((x) => {
        const vals = byX.get(x)!;
        return { x, mean: mean(vals), std: sampleStd(vals), n: vals.length };
      });
    series.push({ label, points });
  }
  return series;
}

/** One series per listed y column instead of per label value. */
export function columnSeries(
  table: Table,
  x: string,
  yColumns: readonly string[],
): Series[] {
  return yColumns.map((y) => {
    const byX = new Map<number, number[]>();
    for (const row of table.rows) {
      const xv = numeric(row, x, table.path);
      const yv = numeric(row, y, table.path);
      const vals = byX.get(xv);
      if (vals) vals.push(yv);
      else byX.set(xv, [yv]);
    }
    const points = [...byX.keys()]
      .sort((a, b) => a - b)
      .map((xv) => {
        const vals = byX.get(xv)!;
        return { x: xv, mean: mean(vals), std: sampleStd(vals), n: vals.length };
      });
    return { label: y, points };
  });
}
