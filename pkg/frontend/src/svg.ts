/** SVG backend: hand-rolled markup, no drawing dependencies. */
import { FigureModel } from "./figure.js";
import { HEIGHT, MARGIN, WIDTH, color, projection } from "./layout.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

export function renderSvg(model: FigureModel): string {
  const proj = projection(model);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${esc(model.title)}</text>`,
  );

  // gridlines and ticks
  for (let i = 0; i < model.yTicks.positions.length; i++) {
    const y = proj.py(model.yTicks.positions[i]);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">` +
        `${esc(model.yTicks.labels[i])}</text>`,
    );
  }
  for (let i = 0; i < model.xTicks.positions.length; i++) {
    const x = proj.px(model.xTicks.positions[i]);
    parts.push(
      `<line x1="${fmt(x)}" y1="${HEIGHT - MARGIN.bottom}" x2="${fmt(x)}" ` +
        `y2="${HEIGHT - MARGIN.bottom + 5}" stroke="#333333"/>`,
      `<text x="${fmt(x)}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" ` +
        `font-size="11">${esc(model.xTicks.labels[i])}</text>`,
    );
  }
  // axes
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${proj.plotW}" height="${proj.plotH}" ` +
      `fill="none" stroke="#333333"/>`,
    `<text x="${WIDTH / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">` +
      `${esc(model.xLabel)}</text>`,
    `<text x="16" y="${HEIGHT / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 16 ${HEIGHT / 2})">${esc(model.yLabel)}` +
      `${model.scale === "log-y" ? " (log scale)" : ""}</text>`,
  );

  for (const ref of model.refLines) {
    const y = proj.py(ref);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y)}" ` +
        `stroke="#444444" stroke-width="1.5" stroke-dasharray="6 4"/>`,
    );
  }

  if (model.kind === "bar") {
    const groups = model.series.length;
    const slot = proj.plotW / Math.max(model.categories.length, 1);
    const barW = (slot * 0.7) / Math.max(groups, 1);
    model.series.forEach((s, si) => {
      for (const p of s.points) {
        const cx = proj.px(p.x);
        const x0 = cx - (groups * barW) / 2 + si * barW;
        const y0 = proj.py(Math.max(p.y, model.yRange[0]));
        const base = proj.py(Math.max(0, model.yRange[0]));
        parts.push(
          `<rect x="${fmt(x0)}" y="${fmt(Math.min(y0, base))}" width="${fmt(barW)}" ` +
            `height="${fmt(Math.abs(base - y0))}" fill="${color(si)}" fill-opacity="0.85"/>`,
        );
      }
    });
  } else {
    model.series.forEach((s, si) => {
      const band = s.points.filter((p) => p.hi > p.lo && (model.scale !== "log-y" || p.lo > 0));
      if (band.length > 1) {
        const upper = band.map((p) => `${fmt(proj.px(p.x))},${fmt(proj.py(p.hi))}`);
        const lower = band
          .slice()
          .reverse()
          .map((p) => `${fmt(proj.px(p.x))},${fmt(proj.py(p.lo))}`);
        parts.push(
          `<polygon points="${[...upper, ...lower].join(" ")}" fill="${color(si)}" ` +
            `fill-opacity="0.15" stroke="none"/>`,
        );
      }
      const pts = s.points.map((p) => `${fmt(proj.px(p.x))},${fmt(proj.py(p.y))}`).join(" ");
      parts.push(
        `<polyline points="${pts}" fill="none" stroke="${color(si)}" stroke-width="2"/>`,
      );
      for (const p of s.points) {
        parts.push(
          `<circle cx="${fmt(proj.px(p.x))}" cy="${fmt(proj.py(p.y))}" r="3" fill="${color(si)}"/>`,
        );
      }
    });
  }

  // legend
  model.series.forEach((s, si) => {
    const y = MARGIN.top + 14 + si * 16;
    parts.push(
      `<rect x="${MARGIN.left + 10}" y="${y - 9}" width="12" height="12" fill="${color(si)}"/>`,
      `<text x="${MARGIN.left + 27}" y="${y + 1}" font-size="12">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
