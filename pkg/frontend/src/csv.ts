/**
 * Reader for ris-lab result CSVs.
 *
 * Header: experiment,<coord columns...>,metric,value,ci_low,ci_high,trials,seed
 * Coordinate cells may be numbers or labels (e.g. b = "inf").
 */
import { readFileSync } from "fs";

export interface ResultRow {
  experiment: string;
  coords: Record<string, number | string>;
  metric: string;
  value: number;
  ciLow: number;
  ciHigh: number;
  trials: number;
  seed: number;
}

export interface ResultTable {
  coordKeys: string[];
  rows: ResultRow[];
}

const HEAD = "experiment";
const TAIL = ["metric", "value", "ci_low", "ci_high", "trials", "seed"];

function parseCoord(text: string): number | string {
  if (text === "") return text;
  const num = Number(text);
  return Number.isFinite(num) ? num : text;
}

export function parseResultCsv(text: string, source = "<csv>"): ResultTable {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${source}: empty file`);
  }
  const header = lines[0].split(",");
  if (header[0] !== HEAD || TAIL.some((c, i) => header[header.length - 6 + i] !== c)) {
    throw new Error(`${source}: unexpected header ${lines[0]}`);
  }
  const coordKeys = header.slice(1, header.length - 6);
  const rows: ResultRow[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`${source}: row has ${cells.length} cells, expected ${header.length}`);
    }
    const coords: Record<string, number | string> = {};
    coordKeys.forEach((k, i) => {
      coords[k] = parseCoord(cells[1 + i]);
    });
    const tail = cells.slice(cells.length - 6);
    rows.push({
      experiment: cells[0],
      coords,
      metric: tail[0],
      value: Number(tail[1]),
      ciLow: Number(tail[2]),
      ciHigh: Number(tail[3]),
      trials: Number(tail[4]),
      seed: Number(tail[5]),
    });
  }
  if (rows.length === 0) {
    throw new Error(`${source}: empty data (header only)`);
  }
  return { coordKeys, rows };
}

export function readResultCsv(path: string): ResultTable {
  return parseResultCsv(readFileSync(path, "utf-8"), path);
}
