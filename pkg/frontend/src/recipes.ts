/** Recipe loading and the built-in recipes for known experiment CSVs. */
import { existsSync, readFileSync } from "fs";
import { join } from "path";
import { FigureRecipe, Kind, Scale } from "./figure.js";

const KINDS: Kind[] = ["line", "bar"];
const SCALES: Scale[] = ["linear", "log-y"];

export function loadRecipe(path: string): FigureRecipe {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`${path}: ${(err as Error).message}`);
  }
  const obj = raw as Partial<FigureRecipe>;
  for (const key of ["input", "x", "output"] as const) {
    if (typeof obj[key] !== "string" || obj[key]!.length === 0) {
      throw new Error(`${path}: missing recipe field '${key}'`);
    }
  }
  if (!Array.isArray(obj.groupBy)) {
    throw new Error(`${path}: 'groupBy' must be an array of column names`);
  }
  const scale = obj.scale ?? "linear";
  const kind = obj.kind ?? "line";
  if (!SCALES.includes(scale)) throw new Error(`${path}: unknown scale '${scale}'`);
  if (!KINDS.includes(kind)) throw new Error(`${path}: unknown kind '${kind}'`);
  return { ...obj, scale, kind } as FigureRecipe;
}

/** One built-in recipe per experiment CSV found in `dir`. */
export function autoRecipes(dir: string, outDir?: string): FigureRecipe[] {
  const out = outDir ?? dir;
  const defs: Array<Omit<FigureRecipe, "input" | "output"> & { name: string }> = [
    {
      name: "fig4-ratio",
      x: "N",
      groupBy: ["b"],
      metrics: ["rate_ratio"],
      scale: "linear",
      kind: "line",
      title: "Ergodic-rate ratio vs ideal reflection",
    },
    {
      name: "fig5-mrt-ratio",
      x: "N",
      groupBy: ["M"],
      metrics: ["mrt_selection_rate_ratio"],
      scale: "linear",
      kind: "line",
      title: "Matched precoding vs antenna selection",
    },
    {
      name: "fig6-ser",
      x: "es_n0_db",
      groupBy: ["N", "metric"],
      metrics: ["ser_sim", "ser_theory"],
      scale: "log-y",
      kind: "line",
      title: "Symbol error rate of the reflected link",
    },
    {
      name: "fig7-convergence",
      x: "slot",
      groupBy: ["metric"],
      scale: "linear",
      kind: "line",
      title: "Scheduler convergence",
    },
    {
      name: "fig8-individual",
      x: "ue",
      groupBy: ["min_rate"],
      metrics: ["avg_rate_mbps"],
      refMetric: "min_rate_mbps",
      scale: "linear",
      kind: "bar",
      title: "Per-user average rates",
    },
    {
      name: "fig9-sumrate",
      x: "N",
      groupBy: ["min_rate"],
      metrics: ["avg_sum_rate_mbps"],
      scale: "linear",
      kind: "line",
      title: "Average sum rate",
    },
    {
      name: "custom",
      x: "N",
      groupBy: ["b"],
      metrics: ["rate_ratio"],
      scale: "linear",
      kind: "line",
      title: "Custom ratio sweep",
    },
  ];
  const recipes: FigureRecipe[] = [];
  for (const def of defs) {
    const input = join(dir, `${def.name}.csv`);
    if (existsSync(input)) {
      const { name, ...rest } = def;
      recipes.push({ ...rest, input, output: join(out, name) });
    }
  }
  return recipes;
}
