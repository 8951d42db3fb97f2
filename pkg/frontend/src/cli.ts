#!/usr/bin/env node
import * as fs from "node:fs";
import * as path from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { DataError, readSummaryDir } from "./data.js";
import { resolveFigures } from "./figures.js";

export interface RenderResult {
  written: string[];
}

/** Render the requested figures from one experiment output directory. */
export function renderAll(summaryDir: string, figures: string[], outDir: string): RenderResult {
  const ctx = readSummaryDir(summaryDir);
  const resolved = resolveFigures(ctx, figures);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const figure of resolved) {
    const svg = figure.render(ctx);
    const outPath = path.join(outDir, `${figure.name}.svg`);
    fs.writeFileSync(outPath, svg);
    written.push(outPath);
  }
  return { written };
}

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("rfocus-plots")
    .option("summary", {
      type: "string",
      demandOption: true,
      describe: "experiment output directory (manifest.json, summary.json, series/, grids/)",
    })
    .option("figures", {
      type: "string",
      default: "all",
      describe: "comma-separated figure names, or 'all'",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "directory to write SVG figures into",
    })
    .strict()
    .fail((msg, err) => {
      throw err ?? new DataError(msg);
    })
    .parse();

  const requested = args.figures.split(",").map((s) => s.trim()).filter(Boolean);
  const result = renderAll(args.summary, requested.length ? requested : ["all"], args.out);
  for (const file of result.written) {
    console.log(`wrote ${file}`);
  }
  return 0;
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (isDirectRun) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(`rfocus-plots: ${err instanceof Error ? err.message : err}`);
      process.exit(1);
    });
}
