import * as fs from "node:fs";
import * as path from "node:path";
import Papa from "papaparse";

/** A parsed series CSV: column names plus rows of raw string cells. */
export interface Series {
  columns: string[];
  rows: string[][];
}

export class DataError extends Error {}

export function readSeries(csvPath: string): Series {
  if (!fs.existsSync(csvPath)) {
    throw new DataError(`series file not found: ${csvPath}`);
  }
  const text = fs.readFileSync(csvPath, "utf8");
  if (text.trim() === "") {
    throw new DataError(`empty CSV (no header): ${csvPath}`);
  }
  const parsed = Papa.parse<string[]>(text.trim(), {
    delimiter: ",",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new DataError(
      `malformed CSV ${csvPath}: ${parsed.errors[0].message}`,
    );
  }
  const data = parsed.data;
  if (data.length === 0) {
    throw new DataError(`empty CSV (no header): ${csvPath}`);
  }
  const [columns, ...rows] = data;
  if (rows.length === 0) {
    throw new DataError(`empty CSV (header only, no data rows): ${csvPath}`);
  }
  return { columns, rows };
}

/** Extract a numeric column, failing loudly when it is absent. */
export function numericColumn(series: Series, name: string, file: string): number[] {
  const idx = series.columns.indexOf(name);
  if (idx < 0) {
    throw new DataError(
      `missing column '${name}' in ${file}; found [${series.columns.join(", ")}]`,
    );
  }
  return series.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new DataError(
        `non-numeric value '${row[idx]}' in column '${name}' row ${i} of ${file}`,
      );
    }
    return value;
  });
}

/** String-valued column (e.g. scenario labels), same failure contract. */
export function stringColumn(series: Series, name: string, file: string): string[] {
  const idx = series.columns.indexOf(name);
  if (idx < 0) {
    throw new DataError(
      `missing column '${name}' in ${file}; found [${series.columns.join(", ")}]`,
    );
  }
  return series.rows.map((row) => row[idx]);
}

export interface FieldGrid {
  x0: number;
  y0: number;
  width: number;
  height: number;
  nx: number;
  ny: number;
  /** Row-major power values, ny rows of nx. */
  power: Float64Array;
}

/** Binary field-map layout: 6 little-endian float64 header values
 *  (x0, y0, width, height, nx, ny) followed by ny*nx row-major float64. */
export function readFieldGrid(binPath: string): FieldGrid {
  if (!fs.existsSync(binPath)) {
    throw new DataError(`grid file not found: ${binPath}`);
  }
  const buf = fs.readFileSync(binPath);
  if (buf.length < 48) {
    throw new DataError(`grid file too short: ${binPath}`);
  }
  const header = new Float64Array(6);
  for (let i = 0; i < 6; i++) header[i] = buf.readDoubleLE(8 * i);
  const [x0, y0, width, height] = header;
  const nx = Math.round(header[4]);
  const ny = Math.round(header[5]);
  const expected = 48 + 8 * nx * ny;
  if (nx < 2 || ny < 2 || buf.length !== expected) {
    throw new DataError(
      `grid file ${binPath}: header says ${nx}x${ny} but size is ${buf.length}`,
    );
  }
  const power = new Float64Array(nx * ny);
  for (let i = 0; i < nx * ny; i++) power[i] = buf.readDoubleLE(48 + 8 * i);
  return { x0, y0, width, height, nx, ny, power };
}

export interface SummaryDir {
  dir: string;
  manifest: Record<string, unknown>;
  summary: Record<string, unknown>;
  seriesNames: string[];
  gridNames: string[];
}

export function readSummaryDir(dir: string): SummaryDir {
  const manifestPath = path.join(dir, "manifest.json");
  const summaryPath = path.join(dir, "summary.json");
  for (const p of [manifestPath, summaryPath]) {
    if (!fs.existsSync(p)) throw new DataError(`not an experiment output dir: missing ${p}`);
  }
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf8"));
  const summary = JSON.parse(fs.readFileSync(summaryPath, "utf8"));
  const listNames = (sub: string, ext: string): string[] => {
    const subdir = path.join(dir, sub);
    if (!fs.existsSync(subdir)) return [];
    return fs
      .readdirSync(subdir)
      .filter((f) => f.endsWith(ext))
      .map((f) => f.slice(0, -ext.length))
      .sort();
  };
  return {
    dir,
    manifest,
    summary,
    seriesNames: listNames("series", ".csv"),
    gridNames: listNames("grids", ".bin"),
  };
}

export function seriesPath(dir: string, name: string): string {
  return path.join(dir, "series", `${name}.csv`);
}

export function gridPath(dir: string, name: string): string {
  return path.join(dir, "grids", `${name}.bin`);
}
