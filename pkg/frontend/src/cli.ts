import fs from "node:fs";
import path from "node:path";

import { readTable } from "./csv.js";
import { FIGURES, figureById, renderFigure, type FigureSpec } from "./figures.js";

export interface CliOptions {
  figures: FigureSpec[];
  results: string;
  out: string;
}

export function parseArgs(argv: readonly string[]): CliOptions {
  let id: string | undefined;
  let results = ".";
  let out = ".";
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]!;
    if (a === "--results") results = argv[++i] ?? results;
    else if (a === "--out") out = argv[++i] ?? out;
    else if (a === "--help" || a === "-h") {
      throw new Error(
        "usage: semqoe-figures <figure-id|all> [--results DIR] [--out DIR]\n" +
          `figures: ${FIGURES.map((f) => f.id).join(", ")}`,
      );
    } else if (!a.startsWith("--") && id === undefined) id = a;
    else throw new Error(`unexpected argument ${a}`);
  }
  if (id === undefined) throw new Error("a figure id (or 'all') is required");
  const figures = id === "all" ? [...FIGURES] : [figureById(id)];
  return { figures, results, out };
}

export function run(argv: readonly string[]): string[] {
  const opts = parseArgs(argv);
  fs.mkdirSync(opts.out, { recursive: true });
  const written: string[] = [];
  for (const spec of opts.figures) {
    const table = readTable(path.join(opts.results, spec.csv));
    const svg = renderFigure(spec, table);
    const target = path.join(opts.out, `${spec.id}.svg`);
    fs.writeFileSync(target, svg + "\n");
    written.push(target);
  }
  return written;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (invokedDirectly) {
  try {
    for (const p of run(process.argv.slice(2))) console.log(p);
  } catch (e) {
    console.error(e instanceof Error ? e.message : String(e));
    process.exit(1);
  }
}
