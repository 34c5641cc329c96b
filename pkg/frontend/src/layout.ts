/** Shared plot geometry and color palette for both image backends. */
import { FigureModel } from "./figure.js";

export const WIDTH = 800;
export const HEIGHT = 520;
export const MARGIN = { left: 80, right: 24, top: 44, bottom: 56 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export interface Projection {
  px(x: number): number;
  py(y: number): number;
  plotW: number;
  plotH: number;
}

export function projection(model: FigureModel): Projection {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const [xLo, xHi] = model.xRange;
  const [yLo, yHi] = model.yRange;
  const fx = (x: number) => (x - xLo) / (xHi - xLo);
  const fy =
    model.scale === "log-y"
      ? (y: number) => (Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (y: number) => (y - yLo) / (yHi - yLo);
  return {
    plotW,
    plotH,
    px: (x) => MARGIN.left + fx(x) * plotW,
    py: (y) => MARGIN.top + (1 - fy(y)) * plotH,
  };
}

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}
