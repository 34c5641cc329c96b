/**
 * PNG backend: a tiny RGB rasterizer (lines, rectangles, a 5x7 digit font for
 * tick labels) plus a from-scratch PNG encoder over node's zlib.
 */
import { deflateSync } from "zlib";
import { FigureModel } from "./figure.js";
import { HEIGHT, MARGIN, WIDTH, color, projection } from "./layout.js";

export class Raster {
  readonly data: Uint8Array;

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.data = new Uint8Array(width * height * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const at = (yi * this.width + xi) * 3;
    this.data[at] = rgb[0];
    this.data[at + 1] = rgb[1];
    this.data[at + 2] = rgb[2];
  }

  fillRect(x0: number, y0: number, w: number, h: number, rgb: [number, number, number]): void {
    for (let y = Math.round(y0); y < Math.round(y0 + h); y++) {
      for (let x = Math.round(x0); x < Math.round(x0 + w); x++) {
        this.set(x, y, rgb);
      }
    }
  }

  line(
    x0: number,
    y0: number,
    x1: number,
    y1: number,
    rgb: [number, number, number],
    thickness = 1,
  ): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1) * 2;
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      const x = x0 + (x1 - x0) * t;
      const y = y0 + (y1 - y0) * t;
      for (let dx = 0; dx < thickness; dx++) {
        for (let dy = 0; dy < thickness; dy++) {
          this.set(x + dx - (thickness - 1) / 2, y + dy - (thickness - 1) / 2, rgb);
        }
      }
    }
  }
}

// 5x7 glyphs for tick labels; rows top to bottom, '#' marks a pixel.
const FONT: Record<string, string[]> = {
  "0": [" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "],
  "1": ["  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "],
  "2": [" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"],
  "3": [" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "],
  "4": ["   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "],
  "5": ["#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "],
  "6": [" ### ", "#    ", "#    ", "#### ", "#   #", "#   #", " ### "],
  "7": ["#####", "    #", "   # ", "  #  ", "  #  ", "  #  ", "  #  "],
  "8": [" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "],
  "9": [" ### ", "#   #", "#   #", " ####", "    #", "    #", " ### "],
  "-": ["     ", "     ", "     ", " ### ", "     ", "     ", "     "],
  "+": ["     ", "  #  ", "  #  ", "#####", "  #  ", "  #  ", "     "],
  ".": ["     ", "     ", "     ", "     ", "     ", "  ## ", "  ## "],
  e: ["     ", "     ", " ### ", "#  ##", "###  ", "#   #", " ### "],
  " ": ["     ", "     ", "     ", "     ", "     ", "     ", "     "],
};

export function drawText(
  raster: Raster,
  x: number,
  y: number,
  text: string,
  rgb: [number, number, number],
  align: "left" | "center" | "right" = "left",
): void {
  const width = text.length * 6;
  let x0 = Math.round(x);
  if (align === "center") x0 -= Math.round(width / 2);
  if (align === "right") x0 -= width;
  for (const ch of text) {
    const glyph = FONT[ch] ?? FONT[" "];
    for (let r = 0; r < 7; r++) {
      for (let c = 0; c < 5; c++) {
        if (glyph[r][c] === "#") raster.set(x0 + c, y + r, rgb);
      }
    }
    x0 += 6;
  }
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of buf) {
    c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const length = Buffer.alloc(4);
  length.writeUInt32BE(data.length, 0);
  const body = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(data)]);
  const tail = Buffer.alloc(4);
  tail.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([length, body, tail]);
}

export function encodePng(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // truecolor RGB
  const raw = Buffer.alloc(height * (1 + width * 3));
  for (let y = 0; y < height; y++) {
    raw[y * (1 + width * 3)] = 0; // filter: none
    raw.set(data.subarray(y * width * 3, (y + 1) * width * 3), y * (1 + width * 3) + 1);
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

function hexToRgb(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

const BLACK: [number, number, number] = [40, 40, 40];
const GRID: [number, number, number] = [221, 221, 221];

export function renderPng(model: FigureModel): Buffer {
  const raster = new Raster(WIDTH, HEIGHT);
  const proj = projection(model);

  for (const pos of model.yTicks.positions) {
    const y = proj.py(pos);
    raster.line(MARGIN.left, y, WIDTH - MARGIN.right, y, GRID);
  }
  model.yTicks.positions.forEach((pos, i) => {
    drawText(raster, MARGIN.left - 8, proj.py(pos) - 3, model.yTicks.labels[i], BLACK, "right");
  });
  model.xTicks.positions.forEach((pos, i) => {
    const label = model.xTicks.labels[i];
    // the bitmap font only covers numeric labels; category labels fall back to index
    const text = /^[0-9e+. -]+$/.test(label) ? label : String(i);
    drawText(raster, proj.px(pos), HEIGHT - MARGIN.bottom + 8, text, BLACK, "center");
  });

  // frame
  raster.line(MARGIN.left, MARGIN.top, WIDTH - MARGIN.right, MARGIN.top, BLACK);
  raster.line(MARGIN.left, HEIGHT - MARGIN.bottom, WIDTH - MARGIN.right, HEIGHT - MARGIN.bottom, BLACK);
  raster.line(MARGIN.left, MARGIN.top, MARGIN.left, HEIGHT - MARGIN.bottom, BLACK);
  raster.line(WIDTH - MARGIN.right, MARGIN.top, WIDTH - MARGIN.right, HEIGHT - MARGIN.bottom, BLACK);

  for (const ref of model.refLines) {
    const y = proj.py(ref);
    for (let x = MARGIN.left; x < WIDTH - MARGIN.right; x += 10) {
      raster.line(x, y, Math.min(x + 5, WIDTH - MARGIN.right), y, BLACK);
    }
  }

  if (model.kind === "bar") {
    const groups = model.series.length;
    const slot = proj.plotW / Math.max(model.categories.length, 1);
    const barW = (slot * 0.7) / Math.max(groups, 1);
    model.series.forEach((s, si) => {
      const rgb = hexToRgb(color(si));
      for (const p of s.points) {
        const cx = proj.px(p.x);
        const x0 = cx - (groups * barW) / 2 + si * barW;
        const y0 = proj.py(Math.max(p.y, model.yRange[0]));
        const base = proj.py(Math.max(0, model.yRange[0]));
        raster.fillRect(x0, Math.min(y0, base), barW, Math.abs(base - y0), rgb);
      }
    });
  } else {
    model.series.forEach((s, si) => {
      const rgb = hexToRgb(color(si));
      for (let i = 1; i < s.points.length; i++) {
        const a = s.points[i - 1];
        const b = s.points[i];
        raster.line(proj.px(a.x), proj.py(a.y), proj.px(b.x), proj.py(b.y), rgb, 2);
      }
      for (const p of s.points) {
        raster.fillRect(proj.px(p.x) - 2, proj.py(p.y) - 2, 4, 4, rgb);
      }
    });
  }

  // legend swatches
  model.series.forEach((s, si) => {
    const y = MARGIN.top + 8 + si * 14;
    raster.fillRect(MARGIN.left + 8, y, 10, 10, hexToRgb(color(si)));
  });

  return encodePng(raster);
}
