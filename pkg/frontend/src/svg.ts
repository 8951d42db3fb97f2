/** Deterministic SVG assembly: fixed canvas, fixed-precision coordinates,
 *  no timestamps or random ids. */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { left: 70, right: 20, top: 40, bottom: 55 };

export interface Scale {
  (value: number): number;
}

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Short human label for an axis tick value. */
export function tickLabel(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 1e5 || ax < 1e-3) return x.toExponential(1).replace("+", "");
  if (Number.isInteger(x) && ax < 1e5) return String(x);
  return String(Number(x.toPrecision(3)));
}

export function linearScale(
  domainMin: number,
  domainMax: number,
  rangeMin: number,
  rangeMax: number,
): Scale {
  const span = domainMax - domainMin || 1;
  return (v: number) => rangeMin + ((v - domainMin) / span) * (rangeMax - rangeMin);
}

export function niceTicks(min: number, max: number, count = 5): number[] {
  const span = max - min || 1;
  const rawStep = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= count) ?? candidates[4];
  const ticks: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return ticks;
}

export const PALETTE = ["#1f6fb4", "#d95f02", "#2ca25f", "#7b4fa6", "#c23b6f", "#6b6b2a"];

export class SvgBuilder {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
        `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      `<text x="${WIDTH / 2}" y="24" font-size="16" text-anchor="middle">${escapeXml(title)}</text>`,
    );
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  axes(
    xScale: Scale,
    yScale: Scale,
    xTicks: number[],
    yTicks: number[],
    xLabel: string,
    yLabel: string,
    tickText: (v: number) => string = tickLabel,
  ): void {
    const { left, right, top, bottom } = MARGIN;
    const x0 = left;
    const x1 = WIDTH - right;
    const y0 = HEIGHT - bottom;
    const y1 = top;
    this.parts.push(
      `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#000" stroke-width="1"/>`,
      `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#000" stroke-width="1"/>`,
    );
    for (const t of xTicks) {
      const px = xScale(t);
      this.parts.push(
        `<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#000"/>`,
        `<text x="${fmt(px)}" y="${y0 + 20}" font-size="11" text-anchor="middle">${tickText(t)}</text>`,
      );
    }
    for (const t of yTicks) {
      const py = yScale(t);
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#000"/>`,
        `<text x="${x0 - 8}" y="${fmt(py + 4)}" font-size="11" text-anchor="end">${tickText(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" font-size="13" text-anchor="middle">${escapeXml(xLabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" ` +
        `transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  polyline(points: Array<[number, number]>, color: string, dash = ""): void {
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"${attr}/>`,
    );
  }

  dots(points: Array<[number, number]>, color: string, r = 3): void {
    for (const [x, y] of points) {
      this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${color}"/>`);
    }
  }

  marker(x: number, y: number, color: string): void {
    const s = 6;
    this.parts.push(
      `<line x1="${fmt(x - s)}" y1="${fmt(y)}" x2="${fmt(x + s)}" y2="${fmt(y)}" stroke="${color}" stroke-width="2"/>`,
      `<line x1="${fmt(x)}" y1="${fmt(y - s)}" x2="${fmt(x)}" y2="${fmt(y + s)}" stroke="${color}" stroke-width="2"/>`,
      `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${s + 3}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
  }

  annotation(text: string, line = 0): void {
    this.parts.push(
      `<text x="${MARGIN.left + 10}" y="${MARGIN.top + 16 + 16 * line}" ` +
        `font-size="12" fill="#333">${escapeXml(text)}</text>`,
    );
  }

  legend(entries: Array<[string, string]>): void {
    const x = WIDTH - MARGIN.right - 170;
    let y = MARGIN.top + 10;
    for (const [label, color] of entries) {
      this.parts.push(
        `<line x1="${x}" y1="${y}" x2="${x + 24}" y2="${y}" stroke="${color}" stroke-width="2"/>`,
        `<text x="${x + 30}" y="${y + 4}" font-size="11">${escapeXml(label)}</text>`,
      );
      y += 16;
    }
  }

  image(href: string, x: number, y: number, w: number, h: number): void {
    this.parts.push(
      `<image x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `preserveAspectRatio="none" style="image-rendering:pixelated" href="${href}"/>`,
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
