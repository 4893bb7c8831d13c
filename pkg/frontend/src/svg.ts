import type { Series } from "./aggregate.js";

export interface FrameLabels {
  title: string;
  xLabel: string;
  yLabel: string;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 40, right: 150, bottom: 48, left: 64 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
  "#8c564b", "#17becf", "#7f7f7f",
];

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

const tickText = (v: number): string => {
  const s = v.toPrecision(4);
  return String(Number(s));
};

interface Scale {
  (v: number): number;
  domain: [number, number];
}

function linScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const span = hi - lo || 1;
  const f = ((v: number) => rLo + ((v - lo) / span) * (rHi - rLo)) as Scale;
  f.domain = [lo, hi];
  return f;
}

function extent(series: readonly Series[], pad: boolean): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      lo = Math.min(lo, p.mean - p.std);
      hi = Math.max(hi, p.mean + p.std);
    }
  }
  if (!Number.isFinite(lo)) throw new Error("nothing to draw");
  if (pad) {
    const m = (hi - lo || Math.abs(hi) || 1) * 0.08;
    lo -= m;
    hi += m;
  }
  return [lo, hi];
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i++) out.push(lo + ((hi - lo) * i) / (count - 1));
  return out;
}

function frame(labels: FrameLabels, xs: Scale, ys: Scale, xTicks: number[]): string[] {
  const parts: string[] = [];
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#333"/>`,
  );
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15" class="title">${labels.title}</text>`,
  );
  parts.push(
    `<text x="${MARGIN.left + PLOT_W / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="12">${labels.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${MARGIN.top + PLOT_H / 2})">${labels.yLabel}</text>`,
  );
  for (const t of xTicks) {
    const x = fmt(xs(t));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top + PLOT_H}" x2="${x}" y2="${MARGIN.top + PLOT_H + 5}" stroke="#333"/>`,
      `<text x="${x}" y="${MARGIN.top + PLOT_H + 18}" text-anchor="middle" font-size="10">${tickText(t)}</text>`,
    );
  }
  for (const t of ticks(ys.domain[0], ys.domain[1])) {
    const y = fmt(ys(t));
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="#333"/>`,
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="10">${tickText(t)}</text>`,
    );
  }
  return parts;
}

function legend(labels: readonly string[]): string[] {
  const parts: string[] = [];
  labels.forEach((label, i) => {
    const y = MARGIN.top + 12 + i * 18;
    const color = PALETTE[i % PALETTE.length]!;
    parts.push(
      `<rect x="${WIDTH - MARGIN.right + 12}" y="${y - 8}" width="14" height="10" fill="${color}"/>`,
      `<text x="${WIDTH - MARGIN.right + 32}" y="${y}" font-size="11" class="legend">${label}</text>`,
    );
  });
  return parts;
}

function open(): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" font-family="sans-serif">`;
}

/** Mean lines with markers; whiskers when more than one drop backs a point. */
export function renderLines(series: readonly Series[], labels: FrameLabels): string {
  const [xLo, xHi] = [
    Math.min(...series.flatMap((s) => s.points.map((p) => p.x))),
    Math.max(...series.flatMap((s) => s.points.map((p) => p.x))),
  ];
  const xs = linScale(xLo, xHi, MARGIN.left + 18, MARGIN.left + PLOT_W - 18);
  const [yLo, yHi] = extent(series, true);
  const ys = linScale(yLo, yHi, MARGIN.top + PLOT_H, MARGIN.top);

  const xTickValues = [...new Set(series.flatMap((s) => s.points.map((p) => p.x)))]
    .sort((a, b) => a - b);
  const parts = [open(), ...frame(labels, xs, ys, xTickValues)];
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    if (s.points.length > 1) {
      const path = s.points.map((p) => `${fmt(xs(p.x))},${fmt(ys(p.mean))}`).join(" ");
      parts.push(
        `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
      );
    }
    for (const p of s.points) {
      if (p.n > 1 && p.std > 0) {
        const x = fmt(xs(p.x));
        parts.push(
          `<line class="errorbar" x1="${x}" y1="${fmt(ys(p.mean - p.std))}" x2="${x}" y2="${fmt(ys(p.mean + p.std))}" stroke="${color}"/>`,
        );
      }
      parts.push(
        `<circle cx="${fmt(xs(p.x))}" cy="${fmt(ys(p.mean))}" r="3" fill="${color}"/>`,
      );
    }
  });
  parts.push(...legend(series.map((s) => s.label)), "</svg>");
  return parts.join("\n");
}

/** Grouped bars, one group per x value, with whiskers from the drop std. */
export function renderBars(series: readonly Series[], labels: FrameLabels): string {
  const xValues = [...new Set(series.flatMap((s) => s.points.map((p) => p.x)))]
    .sort((a, b) => a - b);
  const [, yHi] = extent(series, false);
  const ys = linScale(0, yHi * 1.1 || 1, MARGIN.top + PLOT_H, MARGIN.top);
  const groupW = PLOT_W / xValues.length;
  const barW = (groupW * 0.7) / series.length;

  const xTickCenter = ((v: number) =>
    MARGIN.left + (xValues.indexOf(v) + 0.5) * groupW) as Scale;
  xTickCenter.domain = [xValues[0]!, xValues[xValues.length - 1]!];

  const parts = [open(), ...frame(labels, xTickCenter, ys, xValues)];
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    for (const p of s.points) {
      const g = xValues.indexOf(p.x);
      const x0 = MARGIN.left + g * groupW + groupW * 0.15 + i * barW;
      const yTop = ys(p.mean);
      parts.push(
        `<rect x="${fmt(x0)}" y="${fmt(yTop)}" width="${fmt(barW)}" height="${fmt(MARGIN.top + PLOT_H - yTop)}" fill="${color}"/>`,
      );
      if (p.n > 1 && p.std > 0) {
        const cx = fmt(x0 + barW / 2);
        parts.push(
          `<line class="errorbar" x1="${cx}" y1="${fmt(ys(Math.max(0, p.mean - p.std)))}" x2="${cx}" y2="${fmt(ys(p.mean + p.std))}" stroke="#333"/>`,
        );
      }
    }
  });
  parts.push(...legend(series.map((s) => s.label)), "</svg>");
  return parts.join("\n");
}
