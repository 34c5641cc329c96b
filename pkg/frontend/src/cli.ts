#!/usr/bin/env node
/**
 * ris-plots --recipe <figure.json>
 * ris-plots --auto <results-dir> [--out <dir>]
 *
 * Renders ris-lab result CSVs as SVG + PNG. Exit 0 on success, 1 on any
 * usage, parse, or data error.
 */
import { pathToFileURL } from "url";
import { loadRecipe, autoRecipes } from "./recipes.js";
import { render } from "./render.js";

function usage(): void {
  console.error("usage: ris-plots --recipe <path> | --auto <results-dir> [--out <dir>]");
}

export function main(argv: string[]): number {
  const args = [...argv];
  let recipePath: string | undefined;
  let autoDir: string | undefined;
  let outDir: string | undefined;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--recipe") recipePath = args.shift();
    else if (flag === "--auto") autoDir = args.shift();
    else if (flag === "--out") outDir = args.shift();
    else {
      usage();
      return 1;
    }
  }
  if ((recipePath === undefined) === (autoDir === undefined)) {
    usage();
    return 1;
  }
  try {
    const recipes = recipePath !== undefined ? [loadRecipe(recipePath)] : autoRecipes(autoDir!, outDir);
    if (recipes.length === 0) {
      console.error(`no known experiment CSVs found in ${autoDir}`);
      return 1;
    }
    for (const recipe of recipes) {
      const { model, svgPath, pngPath } = render(recipe);
      const points = model.series.reduce((n, s) => n + s.points.length, 0);
      console.log(
        `${recipe.input}: ${model.series.length} series, ${points} points -> ${svgPath}, ${pngPath}`,
      );
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
