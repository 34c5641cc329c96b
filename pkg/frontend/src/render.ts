/** Recipe execution: CSV in, one SVG and one PNG out. */
import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import { readResultCsv } from "./csv.js";
import { FigureModel, FigureRecipe, buildFigure } from "./figure.js";
import { renderPng } from "./png.js";
import { renderSvg } from "./svg.js";

export interface RenderResult {
  model: FigureModel;
  svgPath: string;
  pngPath: string;
}

export function render(recipe: FigureRecipe): RenderResult {
  const table = readResultCsv(recipe.input);
  const model = buildFigure(recipe, table, recipe.input);
  const svgPath = `${recipe.output}.svg`;
  const pngPath = `${recipe.output}.png`;
  mkdirSync(dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, renderSvg(model), "utf-8");
  writeFileSync(pngPath, renderPng(model));
  return { model, svgPath, pngPath };
}
