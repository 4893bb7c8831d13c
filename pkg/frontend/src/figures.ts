import { requireColumns, type Table } from "./csv.js";
import { columnSeries, groupSeries, type Series } from "./aggregate.js";
import { renderBars, renderLines } from "./svg.js";

export interface FigureSpec {
  id: string;
  csv: string; // file name inside the results directory
  kind: "line" | "bar" | "trace" | "served";
  x: string;
  y: string;
  title: string;
  xLabel: string;
  yLabel: string;
}

const SERVED_COLUMNS = [
  "served_sem_single",
  "served_sem_pair",
  "served_conv_single",
  "served_conv_pair",
] as const;

export const FIGURES: readonly FigureSpec[] = [
  {
    id: "qoe-vs-threshold", csv: "results_g_th_sweep.csv", kind: "line",
    x: "sweep_value", y: "total_qoe",
    title: "Total QoE against the serving threshold",
    xLabel: "serving threshold", yLabel: "total QoE",
  },
  {
    id: "qoe-vs-channels", csv: "results_algo_compare.csv", kind: "line",
    x: "sweep_value", y: "total_qoe",
    title: "Total QoE against the channel count",
    xLabel: "channels per cell", yLabel: "total QoE",
  },
  {
    id: "swap-trace", csv: "trace_algo_compare.csv", kind: "trace",
    x: "swap_index", y: "total_qoe",
    title: "QoE along the accepted-swap path",
    xLabel: "swap", yLabel: "total QoE",
  },
  {
    id: "qoe-vs-conventional", csv: "results_conventional_compare.csv", kind: "line",
    x: "sweep_value", y: "total_qoe",
    title: "Semantic against conventional allocation",
    xLabel: "channels per cell", yLabel: "total QoE",
  },
  {
    id: "cooperation-bars", csv: "results_cooperation.csv", kind: "bar",
    x: "sweep_value", y: "total_qoe",
    title: "Effect of inter-cell cooperation",
    xLabel: "", yLabel: "total QoE",
  },
  {
    id: "qoe-vs-users", csv: "results_settings_sweep.csv", kind: "line",
    x: "sweep_value", y: "total_qoe",
    title: "Total QoE against the user population",
    xLabel: "groups per kind", yLabel: "total QoE",
  },
  {
    id: "power-bars", csv: "results_settings_sweep.csv", kind: "bar",
    x: "sweep_value", y: "power_mw",
    title: "Transmit power against the user population",
    xLabel: "groups per kind", yLabel: "total power (mW)",
  },
  {
    id: "coexistence-qoe", csv: "results_coexistence_qoe.csv", kind: "line",
    x: "sweep_value", y: "total_qoe",
    title: "QoE with conventional users in the mix",
    xLabel: "channels per cell", yLabel: "total QoE",
  },
  {
    id: "coexistence-served", csv: "results_coexistence_qoe.csv", kind: "served",
    x: "sweep_value", y: "total_qoe",
    title: "Served users per class",
    xLabel: "channels per cell", yLabel: "served users",
  },
  {
    id: "coexistence-sr", csv: "results_coexistence_sr.csv", kind: "line",
    x: "sweep_value", y: "total_sr_suts_s",
    title: "Delivered semantic rate with conventional users",
    xLabel: "channels per cell", yLabel: "total S-rate (suts/s)",
  },
];

export function figureById(id: string): FigureSpec {
  const spec = FIGURES.find((f) => f.id === id);
  if (!spec) {
    const known = FIGURES.map((f) => f.id).join(", ");
    throw new Error(`unknown figure ${id}; known figures: ${known}`);
  }
  return spec;
}

/** The aggregated series a figure draws; exposed for value-level tests. */
export function figureSeries(spec: FigureSpec, table: Table): Series[] {
  switch (spec.kind) {
    case "trace":
      requireColumns(table, [spec.x, spec.y, "sweep_value"]);
      // one curve per sweep setting; a trace is a single recorded run, so
      // every point carries n=1 and no whiskers
      return groupSeries(table, { x: spec.x, y: spec.y, label: "sweep_value" });
    case "served": {
      requireColumns(table, [spec.x, "method", ...SERVED_COLUMNS]);
      const proposed = table.rows.filter((r) => r["method"] === "proposed");
      return columnSeries({ ...table, rows: proposed }, spec.x, SERVED_COLUMNS);
    }
    default:
      requireColumns(table, [spec.x, spec.y, "method"]);
      return groupSeries(table, { x: spec.x, y: spec.y, label: "method" });
  }
}

export function renderFigure(spec: FigureSpec, table: Table): string {
  const series = figureSeries(spec, table);
  const labels = { title: spec.title, xLabel: spec.xLabel, yLabel: spec.yLabel };
  if (spec.kind === "bar") return renderBars(series, labels);
  return renderLines(series, labels);
}
