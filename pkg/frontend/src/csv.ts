import fs from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

export interface Table {
  path: string;
  fields: string[];
  rows: Row[];
}

export function readTable(path: string): Table {
  const text = fs.readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]!;
    throw new Error(`${path}: malformed CSV (${e.message})`);
  }
  return { path, fields: parsed.meta.fields ?? [], rows: parsed.data };
}

/** Fail fast with the names of whatever the figure actually needs. */
export function requireColumns(table: Table, columns: readonly string[]): void {
  const have = new Set(table.fields);
  const missing = columns.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new Error(`${table.path}: missing column(s) ${missing.join(", ")}`);
  }
  if (table.rows.length === 0) {
    throw new Error(
      `${table.path}: no data rows (need values for ${columns.join(", ")})`,
    );
  }
}

export function numeric(row: Row, column: string, path: string): number {
  const raw = row[column];
  const value = Number(raw);
  if (raw === undefined || raw === "" || !Number.isFinite(value)) {
    throw new Error(`${path}: column ${column} holds non-numeric value ${raw}`);
  }
  return value;
}
