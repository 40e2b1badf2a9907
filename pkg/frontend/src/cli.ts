/**
 * Usage: node dist/cli.js <sweep.csv> [second.csv] [--out figure.svg] [--no-bands]
 *
 * Reads one or two sweep CSVs written by the distdetect CLI and writes a
 * side-by-side SVG line chart of TPR against the sweep's grid value.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { argv, exit } from "node:process";
import { parseSweepCsv, SweepRow } from "./csv.js";
import { renderFigure } from "./chart.js";

function usage(): never {
  console.error(
    "usage: node dist/cli.js <sweep.csv> [second.csv] [--out figure.svg] [--no-bands]",
  );
  exit(2);
}

function main(args: string[]): void {
  const csvPaths: string[] = [];
  let out = "figure.svg";
  let bands = true;
  for (let i = 0; i < args.length; i++) {
    const a = args[i]!;
    if (a === "--out") {
      const value = args[++i];
      if (!value) usage();
      out = value;
    } else if (a === "--no-bands") {
      bands = false;
    } else if (a.startsWith("--")) {
      usage();
    } else {
      csvPaths.push(a);
    }
  }
  if (csvPaths.length < 1 || csvPaths.length > 2) usage();

  const panels: SweepRow[][] = [];
  for (const path of csvPaths) {
    let text: string;
    try {
      text = readFileSync(path, "utf-8");
    } catch (err) {
      console.error(`error: cannot read ${path}: ${(err as Error).message}`);
      exit(3);
    }
    try {
      panels.push(parseSweepCsv(text));
    } catch (err) {
      console.error(`error: ${path}: ${(err as Error).message}`);
      exit(2);
    }
  }

  let svg: string;
  try {
    svg = renderFigure(panels, { bands }).svg;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    exit(2);
  }
  try {
    writeFileSync(out, svg, "utf-8");
  } catch (err) {
    console.error(`error: cannot write ${out}: ${(err as Error).message}`);
    exit(3);
  }
  console.log(`wrote ${out}`);
}

main(argv.slice(2));
