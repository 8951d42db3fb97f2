import {
  DataError,
  SummaryDir,
  gridPath,
  numericColumn,
  readFieldGrid,
  readSeries,
  seriesPath,
  stringColumn,
} from "./data.js";
import { encodePng, heatColor } from "./png.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  SvgBuilder,
  WIDTH,
  linearScale,
  niceTicks,
} from "./svg.js";

export type FigureKind = "heatmap" | "cdf" | "line" | "scatter+fit";

export interface Figure {
  name: string;
  kind: FigureKind;
  render(ctx: SummaryDir): string;
}

const PLOT = {
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

function cdfPoints(values: number[]): Array<[number, number]> {
  const sorted = [...values].sort((a, b) => a - b);
  const n = sorted.length;
  const pts: Array<[number, number]> = [[sorted[0], 0]];
  sorted.forEach((v, i) => pts.push([v, (i + 1) / n]));
  return pts;
}

function cdfFigure(
  name: string,
  seriesName: string,
  columns: string[],
  xLabel: string,
  title: string,
  transform: (v: number) => number = (v) => v,
  reference?: { value: number; label: string },
): Figure {
  return {
    name,
    kind: "cdf",
    render(ctx) {
      const file = seriesPath(ctx.dir, seriesName);
      const series = readSeries(file);
      const samples = columns.map((c) => numericColumn(series, c, file).map(transform));
      const all = samples.flat();
      let lo = Math.min(...all, reference?.value ?? Infinity);
      let hi = Math.max(...all, reference?.value ?? -Infinity);
      if (lo === hi) {
        lo -= 0.5;
        hi += 0.5;
      }
      const xs = linearScale(lo, hi, PLOT.x0, PLOT.x1);
      const ys = linearScale(0, 1, PLOT.y0, PLOT.y1);
      const svg = new SvgBuilder(title);
      svg.axes(xs, ys, niceTicks(lo, hi), niceTicks(0, 1), xLabel, "cumulative fraction");
      samples.forEach((vals, i) => {
        svg.polyline(cdfPoints(vals).map(([v, p]) => [xs(v), ys(p)]), PALETTE[i]);
      });
      if (reference) {
        svg.polyline(
          [
            [xs(reference.value), ys(0)],
            [xs(reference.value), ys(1)],
          ],
          "#888",
          "5,4",
        );
        svg.annotation(reference.label);
      }
      if (columns.length > 1) {
        svg.legend(columns.map((c, i) => [c, PALETTE[i]]));
      }
      return svg.toString();
    },
  };
}

function stat(ctx: SummaryDir, key: string): number | undefined {
  const stats = ctx.summary["stats"] as Record<string, unknown> | undefined;
  const value = stats?.[key];
  return typeof value === "number" ? value : undefined;
}

function statList(ctx: SummaryDir, key: string): number[] | undefined {
  const stats = ctx.summary["stats"] as Record<string, unknown> | undefined;
  const value = stats?.[key];
  return Array.isArray(value) && value.every((v) => typeof v === "number")
    ? (value as number[])
    : undefined;
}

const measurabilityFigure: Figure = {
  name: "measurability_snr",
  kind: "scatter+fit",
  render(ctx) {
    const file = seriesPath(ctx.dir, "measurability");
    const series = readSeries(file);
    const n = numericColumn(series, "n_elements", file).map(Math.log10);
    const snr = numericColumn(series, "snr_db", file);
    const xs = linearScale(Math.min(...n), Math.max(...n), PLOT.x0, PLOT.x1);
    const lo = Math.min(...snr);
    const hi = Math.max(...snr);
    const ys = linearScale(lo, hi, PLOT.y0, PLOT.y1);
    const svg = new SvgBuilder("Probing SNR vs element count");
    svg.axes(
      xs,
      ys,
      n,
      niceTicks(lo, hi),
      "element count",
      "SNR (dB)",
      (v) => (Number.isInteger(v) && v >= 1 && v <= 5 ? String(10 ** v) : String(Number(v.toPrecision(3)))),
    );
    const pts: Array<[number, number]> = n.map((x, i) => [xs(x), ys(snr[i])]);
    svg.polyline(pts, PALETTE[0]);
    svg.dots(pts, PALETTE[0]);
    const slope = stat(ctx, "slope");
    const rho = stat(ctx, "spearman_rho");
    if (slope !== undefined) svg.annotation(`log-log slope ${slope.toFixed(3)}`);
    if (rho !== undefined) svg.annotation(`Spearman rho ${rho.toFixed(3)}`, 1);
    return svg.toString();
  },
};

const quadraticFigure: Figure = {
  name: "quadratic_power",
  kind: "scatter+fit",
  render(ctx) {
    const file = seriesPath(ctx.dir, "quadratic");
    const series = readSeries(file);
    const trials = numericColumn(series, "trial", file);
    const size = numericColumn(series, "subset_size", file).map(Math.log10);
    const power = numericColumn(series, "mean_power", file).map(Math.log10);
    const xs = linearScale(Math.min(...size), Math.max(...size), PLOT.x0, PLOT.x1);
    const ys = linearScale(Math.min(...power), Math.max(...power), PLOT.y0, PLOT.y1);
    const svg = new SvgBuilder("Optimized power vs active-subset size (log-log)");
    svg.axes(
      xs,
      ys,
      niceTicks(Math.min(...size), Math.max(...size)),
      niceTicks(Math.min(...power), Math.max(...power)),
      "log10 subset size",
      "log10 mean power",
    );
    const byTrial = new Map<number, Array<[number, number]>>();
    trials.forEach((t, i) => {
      if (!byTrial.has(t)) byTrial.set(t, []);
      byTrial.get(t)!.push([xs(size[i]), ys(power[i])]);
    });
    let color = 0;
    for (const pts of byTrial.values()) {
      svg.polyline(pts, PALETTE[color % PALETTE.length]);
      color += 1;
    }
    const aligned = stat(ctx, "aligned_slope");
    const slopes = statList(ctx, "slopes");
    if (aligned !== undefined) svg.annotation(`aligned-case slope ${aligned.toFixed(4)}`);
    if (slopes && slopes.length > 0) {
      const lo = Math.min(...slopes).toFixed(3);
      const hi = Math.max(...slopes).toFixed(3);
      svg.annotation(`optimized slopes ${lo}..${hi}`, 1);
    }
    return svg.toString();
  },
};

const optSpeedFigure: Figure = {
  name: "opt_speed_trajectories",
  kind: "line",
  render(ctx) {
    const file = seriesPath(ctx.dir, "opt_speed_trajectories");
    const series = readSeries(file);
    const scenario = stringColumn(series, "scenario", file);
    const used = numericColumn(series, "measurements_used", file);
    const db = numericColumn(series, "best_db", file);
    const xs = linearScale(0, Math.max(...used), PLOT.x0, PLOT.x1);
    const lo = Math.min(0, ...db);
    const hi = Math.max(...db);
    const ys = linearScale(lo, hi, PLOT.y0, PLOT.y1);
    const svg = new SvgBuilder("Optimization gain vs measurements");
    svg.axes(xs, ys, niceTicks(0, Math.max(...used)), niceTicks(lo, hi),
             "measurements used", "best gain (dB)");
    const groups = new Map<string, Array<[number, number]>>();
    scenario.forEach((s, i) => {
      if (!groups.has(s)) groups.set(s, []);
      groups.get(s)!.push([xs(used[i]), ys(db[i])]);
    });
    const entries: Array<[string, string]> = [];
    let color = 0;
    for (const [label, pts] of groups) {
      const c = PALETTE[color % PALETTE.length];
      svg.polyline(pts, c);
      entries.push([`scenario ${label}`, c]);
      color += 1;
    }
    svg.legend(entries);
    return svg.toString();
  },
};

const frequencyFigure: Figure = {
  name: "frequency_response",
  kind: "line",
  render(ctx) {
    const file = seriesPath(ctx.dir, "frequency");
    const series = readSeries(file);
    const freq = numericColumn(series, "frequency_hz", file);
    const gain = numericColumn(series, "improvement_db", file);
    const center = (Math.min(...freq) + Math.max(...freq)) / 2;
    const mhz = freq.map((f) => (f - center) / 1e6);
    const xs = linearScale(Math.min(...mhz), Math.max(...mhz), PLOT.x0, PLOT.x1);
    const lo = Math.min(0, ...gain);
    const hi = Math.max(...gain);
    const ys = linearScale(lo, hi, PLOT.y0, PLOT.y1);
    const svg = new SvgBuilder("Improvement vs frequency offset");
    svg.axes(xs, ys, niceTicks(Math.min(...mhz), Math.max(...mhz)), niceTicks(lo, hi),
             "offset from center (MHz)", "improvement (dB)");
    svg.polyline(mhz.map((m, i) => [xs(m), ys(gain[i])]), PALETTE[0]);
    const measured = stat(ctx, "measured_offset_hz");
    if (measured !== undefined) {
      for (const sign of [-1, 1]) {
        svg.polyline(
          [
            [xs((sign * measured) / 1e6), ys(lo)],
            [xs((sign * measured) / 1e6), ys(hi)],
          ],
          "#888",
          "5,4",
        );
      }
      svg.annotation(`half-gain offset ${(measured / 1e6).toFixed(1)} MHz`);
    }
    return svg.toString();
  },
};

function heatmapFigure(gridName: string): Figure {
  return {
    name: `heatmap_${gridName}`,
    kind: "heatmap",
    render(ctx) {
      const grid = readFieldGrid(gridPath(ctx.dir, gridName));
      const { nx, ny, power } = grid;
      let max = 0;
      for (const v of power) max = Math.max(max, v);
      const rgb = new Uint8Array(nx * ny * 3);
      let peakIdx = 0;
      for (let i = 0; i < power.length; i++) {
        if (power[i] > power[peakIdx]) peakIdx = i;
        // log compression so sidelobes stay visible next to the focus
        const t = max > 0 ? Math.log1p(9 * (power[i] / max)) / Math.log(10) : 0;
        // row 0 of the grid is the lowest y; PNG rows go top-down
        const row = ny - 1 - Math.floor(i / nx);
        const col = i % nx;
        const [r, g, b] = heatColor(t);
        const o = 3 * (row * nx + col);
        rgb[o] = r;
        rgb[o + 1] = g;
        rgb[o + 2] = b;
      }
      const png = encodePng(nx, ny, rgb);
      const plotW = PLOT.x1 - PLOT.x0;
      const plotH = PLOT.y0 - PLOT.y1;
      const xs = linearScale(grid.x0, grid.x0 + grid.width, PLOT.x0, PLOT.x1);
      const ys = linearScale(grid.y0, grid.y0 + grid.height, PLOT.y0, PLOT.y1);
      const svg = new SvgBuilder(`Field power map: ${gridName}`);
      svg.image(`data:image/png;base64,${png.toString("base64")}`,
                PLOT.x0, PLOT.y1, plotW, plotH);
      svg.axes(xs, ys, niceTicks(grid.x0, grid.x0 + grid.width),
               niceTicks(grid.y0, grid.y0 + grid.height), "x (m)", "y (m)");
      // mark the measured focus (peak cell center)
      const peakX = grid.x0 + ((peakIdx % nx) + 0.5) * (grid.width / nx);
      const peakY = grid.y0 + (Math.floor(peakIdx / nx) + 0.5) * (grid.height / ny);
      svg.marker(xs(peakX), ys(peakY), "#ffffff");
      svg.annotation(`peak power ${max.toPrecision(4)} at (${peakX.toFixed(3)}, ${peakY.toFixed(3)}) m`);
      return svg.toString();
    },
  };
}

const STATIC_FIGURES: Array<{ figure: Figure; requiresSeries: string[] }> = [
  {
    figure: cdfFigure(
      "linearity_error_cdf",
      "linearity",
      ["error_with_interactions", "error_noise_only"],
      "relative prediction error (%)",
      "Superposition prediction error",
      (v) => 100 * v,
    ),
    requiresSeries: ["linearity"],
  },
  { figure: measurabilityFigure, requiresSeries: ["measurability"] },
  { figure: quadraticFigure, requiresSeries: ["quadratic"] },
  { figure: optSpeedFigure, requiresSeries: ["opt_speed_trajectories"] },
  { figure: frequencyFigure, requiresSeries: ["frequency"] },
  {
    figure: cdfFigure(
      "pi_bound_cdf",
      "pi_bound",
      ["ratio"],
      "achieved / ideal magnitude",
      "Surface-only optimum relative to the ideal bound",
      (v) => v,
      { value: 1 / Math.PI, label: "1/pi floor" },
    ),
    requiresSeries: ["pi_bound"],
  },
  {
    figure: cdfFigure(
      "two_approx_cdf",
      "two_approx",
      ["worst_ratio"],
      "worst line-split / optimal magnitude",
      "Line-split guarantee across instances",
      (v) => v,
      { value: 0.5, label: "half-optimal reference" },
    ),
    requiresSeries: ["two_approx"],
  },
];

/** Figures whose inputs are present in the given output directory. */
export function availableFigures(ctx: SummaryDir): Figure[] {
  const figures: Figure[] = [];
  for (const { figure, requiresSeries } of STATIC_FIGURES) {
    if (requiresSeries.every((s) => ctx.seriesNames.includes(s))) {
      figures.push(figure);
    }
  }
  for (const gridName of ctx.gridNames) {
    figures.push(heatmapFigure(gridName));
  }
  return figures;
}

export function resolveFigures(ctx: SummaryDir, requested: string[]): Figure[] {
  const available = availableFigures(ctx);
  if (requested.length === 1 && requested[0] === "all") {
    if (available.length === 0) {
      throw new DataError(`no renderable figures found in ${ctx.dir}`);
    }
    return available;
  }
  const byName = new Map(available.map((f) => [f.name, f]));
  return requested.map((name) => {
    const figure = byName.get(name);
    if (!figure) {
      throw new DataError(
        `unknown or unavailable figure '${name}'; available: ${[...byName.keys()].join(", ") || "(none)"}`,
      );
    }
    return figure;
  });
}
