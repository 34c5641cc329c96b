/**
 * Turns result rows into an abstract figure model: grouped series with
 * optional confidence bands, axis ranges, and tick positions. The model is
 * deterministic for given inputs; both the SVG and PNG backends draw it.
 */
import { ResultRow, ResultTable } from "./csv.js";

export type Scale = "linear" | "log-y";
export type Kind = "line" | "bar";

export interface FigureRecipe {
  input: string;
  x: string;
  y?: string; // defaults to "value"
  groupBy: string[];
  metrics?: string[]; // keep only these metrics (default: all)
  refMetric?: string; // horizontal reference line from this metric's max value
  scale: Scale;
  kind: Kind;
  output: string; // path stem; .svg and .png are appended
  title?: string;
}

export interface Point {
  x: number;
  y: number;
  lo: number;
  hi: number;
}

export interface Series {
  label: string;
  points: Point[];
}

export interface Ticks {
  positions: number[];
  labels: string[];
}

export interface FigureModel {
  title: string;
  xLabel: string;
  yLabel: string;
  scale: Scale;
  kind: Kind;
  series: Series[];
  categories: string[]; // bar charts: x category labels
  refLines: number[];
  xRange: [number, number];
  yRange: [number, number];
  xTicks: Ticks;
  yTicks: Ticks;
}

function formatNumber(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return Number(v.toPrecision(4)).toString();
}

/** Even tick positions at a "nice" step covering [lo, hi]. */
export function linearTicks(lo: number, hi: number, target = 6): Ticks {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const raw = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= target) ?? 10 * mag;
  const first = Math.ceil(lo / step) * step;
  const positions: number[] = [];
  for (let v = first; v <= hi + 1e-12 * step; v += step) {
    positions.push(Number(v.toFixed(12)));
  }
  return { positions, labels: positions.map(formatNumber) };
}

/** Decade ticks for log axes. */
export function logTicks(lo: number, hi: number): Ticks {
  const positions: number[] = [];
  for (let d = Math.ceil(Math.log10(lo) - 1e-9); d <= Math.floor(Math.log10(hi) + 1e-9); d++) {
    positions.push(Number(`1e${d}`)); // exact decimal literal, not pow()
  }
  if (positions.length === 0) positions.push(lo, hi);
  return { positions, labels: positions.map((p) => `1e${Math.round(Math.log10(p))}`) };
}

function groupLabel(row: ResultRow, groupBy: string[]): string {
  return groupBy
    .map((k) => (k === "metric" ? row.metric : `${k}=${row.coords[k]}`))
    .join(" ");
}

function checkColumns(recipe: FigureRecipe, table: ResultTable, source: string): void {
  const known = new Set([...table.coordKeys, "metric", "value", "ci_low", "ci_high"]);
  for (const col of [recipe.x, ...recipe.groupBy]) {
    if (!known.has(col)) {
      throw new Error(`${source}: column '${col}' not found (have ${[...known].join(", ")})`);
    }
  }
}

export function buildFigure(recipe: FigureRecipe, table: ResultTable, source = "<rows>"): FigureModel {
  checkColumns(recipe, table, source);
  let rows = table.rows;
  if (recipe.metrics && recipe.metrics.length > 0) {
    rows = rows.filter((r) => recipe.metrics!.includes(r.metric));
  }
  const refLines: number[] = [];
  if (recipe.refMetric) {
    const refRows = table.rows.filter((r) => r.metric === recipe.refMetric);
    if (refRows.length > 0) {
      const top = Math.max(...refRows.map((r) => r.value));
      if (top > 0) refLines.push(top);
    }
    rows = rows.filter((r) => r.metric !== recipe.refMetric);
  }
  if (rows.length === 0) {
    throw new Error(`${source}: empty data after metric selection`);
  }

  const isBar = recipe.kind === "bar";
  const categories: string[] = [];
  const catIndex = new Map<string, number>();
  const xValue = (row: ResultRow): number => {
    const raw = row.coords[recipe.x];
    if (isBar || typeof raw !== "number") {
      const key = String(raw);
      if (!catIndex.has(key)) {
        catIndex.set(key, categories.length);
        categories.push(key);
      }
      return catIndex.get(key)!;
    }
    return raw;
  };

  const bySeries = new Map<string, Point[]>();
  for (const row of rows) {
    const label = groupLabel(row, recipe.groupBy) || row.metric;
    const x = xValue(row);
    const y = row.value;
    if (recipe.scale === "log-y" && !(y > 0)) continue; // log axis cannot show zeros
    const pts = bySeries.get(label) ?? [];
    pts.push({ x, y, lo: row.ciLow, hi: row.ciHigh });
    bySeries.set(label, pts);
  }
  const series: Series[] = [...bySeries.entries()].map(([label, points]) => ({
    label,
    points: points.slice().sort((a, b) => a.x - b.x),
  }));
  if (series.every((s) => s.points.length === 0)) {
    throw new Error(`${source}: no plottable points`);
  }

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ysAll = series
    .flatMap((s) => s.points.flatMap((p) => [p.y, p.lo, p.hi]))
    .concat(refLines)
    .filter((v) => Number.isFinite(v));
  const ys = recipe.scale === "log-y" ? ysAll.filter((v) => v > 0) : ysAll;
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  if (isBar) {
    xLo = -0.5;
    xHi = categories.length - 0.5;
  } else if (xLo === xHi) {
    xLo -= 1;
    xHi += 1;
  }
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (recipe.scale === "log-y") {
    yLo = Math.pow(10, Math.floor(Math.log10(yLo)));
    yHi = Math.pow(10, Math.ceil(Math.log10(yHi)));
    if (yLo === yHi) yHi *= 10;
  } else {
    if (isBar) yLo = Math.min(0, yLo);
    const pad = 0.05 * (yHi - yLo || Math.abs(yHi) || 1);
    yLo = recipe.kind === "bar" ? yLo : yLo - pad;
    yHi = yHi + pad;
  }

  const xTicks = isBar
    ? { positions: categories.map((_, i) => i), labels: categories.slice() }
    : linearTicks(xLo, xHi);
  const yTicks = recipe.scale === "log-y" ? logTicks(yLo, yHi) : linearTicks(yLo, yHi);

  return {
    title: recipe.title ?? source,
    xLabel: recipe.x,
    yLabel: recipe.metrics?.join(", ") ?? "value",
    scale: recipe.scale,
    kind: recipe.kind,
    series,
    categories,
    refLines,
    xRange: [xLo, xHi],
    yRange: [yLo, yHi],
    xTicks,
    yTicks,
  };
}
