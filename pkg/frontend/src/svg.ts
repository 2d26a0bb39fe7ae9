/**
 * Minimal SVG scene builder: linear/log scales, axes with ticks, polyline
 * series, marker groups, and a legend. No DOM, no canvas -- just strings.
 */

export interface Scale {
  (value: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error("log scale requires a positive domain");
  }
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const [r0, r1] = range;
  const scale = ((value: number) =>
    r0 + ((Math.log10(value) - l0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

/** Pad a data extent so no point sits on the frame. */
export function padded(lo: number, hi: number, frac = 0.06): [number, number] {
  if (lo === hi) {
    const bump = Math.abs(lo) * frac + 1e-9;
    return [lo - bump, hi + bump];
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

export function paddedLog(lo: number, hi: number, frac = 0.08): [number, number] {
  const ratio = (hi / lo) ** frac;
  return [lo / ratio, hi * ratio];
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export const MARKERS = ["circle", "cross", "triangle", "square", "diamond"] as const;
export type MarkerShape = (typeof MARKERS)[number];

export const PALETTE = ["#c0392b", "#2457a7", "#1c1c1c", "#1e8449", "#8e44ad", "#b7791f"];

function markerPath(shape: MarkerShape, x: number, y: number, r: number): string {
  const f = (v: number) => v.toFixed(2);
  switch (shape) {
    case "circle":
      return `<circle cx="${f(x)}" cy="${f(y)}" r="${f(r)}" />`;
    case "cross":
      return `<path d="M${f(x - r)} ${f(y - r)}L${f(x + r)} ${f(y + r)}` +
        `M${f(x - r)} ${f(y + r)}L${f(x + r)} ${f(y - r)}" />`;
    case "triangle":
      return `<path d="M${f(x)} ${f(y - r)}L${f(x + r)} ${f(y + r)}` +
        `L${f(x - r)} ${f(y + r)}Z" />`;
    case "square":
      return `<rect x="${f(x - r)}" y="${f(y - r)}" width="${f(2 * r)}" height="${f(2 * r)}" />`;
    case "diamond":
      return `<path d="M${f(x)} ${f(y - r)}L${f(x + r)} ${f(y)}` +
        `L${f(x)} ${f(y + r)}L${f(x - r)} ${f(y)}Z" />`;
  }
}

export interface LineSeries {
  label: string;
  points: Array<[number, number]>;
  color: string;
  dash?: string;
}

export interface MarkerSeries {
  label: string;
  points: Array<[number, number]>;
  color: string;
  shape: MarkerShape;
}

export class Figure {
  readonly width: number;
  readonly height: number;
  readonly margin = { top: 42, right: 24, bottom: 46, left: 64 };
  private lines: LineSeries[] = [];
  private markers: MarkerSeries[] = [];
  private extras: string[] = [];

  constructor(
    private title: string,
    private xLabel: string,
    private yLabel: string,
    private xScale: Scale,
    private yScale: Scale,
    width = 640,
    height = 440,
    private yTickFormat: (v: number) => string = (v) => v.toPrecision(3),
  ) {
    this.width = width;
    this.height = height;
  }

  addLine(series: LineSeries): void {
    this.lines.push(series);
  }

  addMarkers(series: MarkerSeries): void {
    this.markers.push(series);
  }

  /** Raw SVG fragment drawn beneath the data (reference diagonals etc.). */
  addUnderlay(fragment: string): void {
    this.extras.push(fragment);
  }

  private ticks(scale: Scale, count = 6): number[] {
    const [lo, hi] = scale.domain;
    const out: number[] = [];
    for (let i = 0; i <= count; i += 1) {
      out.push(lo + ((hi - lo) * i) / count);
    }
    return out;
  }

  render(): string {
    const { top, right, bottom, left } = this.margin;
    const plotW = this.width - left - right;
    const plotH = this.height - top - bottom;
    const px = (v: number) => left + this.xScale(v) * plotW;
    const py = (v: number) => top + (1 - this.yScale(v)) * plotH;

    const parts: string[] = [];
    parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="12">`,
    );
    parts.push(`<rect width="${this.width}" height="${this.height}" fill="white"/>`);
    parts.push(`<text x="${this.width / 2}" y="24" text-anchor="middle" ` +
      `font-size="15">${esc(this.title)}</text>`);

    // frame and ticks
    parts.push(`<g class="axes" stroke="#444" fill="none">` +
      `<rect x="${left}" y="${top}" width="${plotW}" height="${plotH}"/></g>`);
    const tickParts: string[] = [`<g class="ticks" fill="#222" stroke="none">`];
    for (const t of this.ticks(this.xScale)) {
      const x = px(t);
      tickParts.push(`<line x1="${x}" y1="${top + plotH}" x2="${x}" ` +
        `y2="${top + plotH + 4}" stroke="#444"/>`);
      tickParts.push(`<text x="${x}" y="${top + plotH + 18}" ` +
        `text-anchor="middle">${esc(t.toPrecision(3))}</text>`);
    }
    for (const t of this.ticks(this.yScale, 5)) {
      const y = py(t);
      tickParts.push(`<line x1="${left - 4}" y1="${y}" x2="${left}" y2="${y}" stroke="#444"/>`);
      tickParts.push(`<text x="${left - 8}" y="${y + 4}" ` +
        `text-anchor="end">${esc(this.yTickFormat(t))}</text>`);
    }
    tickParts.push(`</g>`);
    parts.push(tickParts.join(""));
    parts.push(`<text x="${left + plotW / 2}" y="${this.height - 10}" ` +
      `text-anchor="middle">${esc(this.xLabel)}</text>`);
    parts.push(`<text x="18" y="${top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${top + plotH / 2})">${esc(this.yLabel)}</text>`);

    for (const extra of this.extras) {
      parts.push(extra);
    }

    for (const series of this.lines) {
      const path = series.points
        .map(([x, y], i) => `${i === 0 ? "M" : "L"}${px(x).toFixed(2)} ${py(y).toFixed(2)}`)
        .join("");
      const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
      parts.push(`<path class="series-line" data-label="${esc(series.label)}" ` +
        `d="${path}" fill="none" stroke="${series.color}" stroke-width="1.6"${dash}/>`);
    }

    for (const series of this.markers) {
      const glyphs = series.points
        .map(([x, y]) => markerPath(series.shape, px(x), py(y), 4))
        .join("");
      const fill = series.shape === "cross" ? "none" : series.color;
      parts.push(`<g class="series-markers" data-label="${esc(series.label)}" ` +
        `fill="${fill}" stroke="${series.color}" stroke-width="1.4">${glyphs}</g>`);
    }

    // legend: one entry per distinct label, lines first
    const entries: Array<{ label: string; color: string; dash?: string; shape?: MarkerShape }> = [];
    for (const s of this.lines) {
      entries.push({ label: s.label, color: s.color, dash: s.dash });
    }
    for (const s of this.markers) {
      entries.push({ label: s.label, color: s.color, shape: s.shape });
    }
    const legendX = left + 10;
    let legendY = top + 14;
    const legendParts = [`<g class="legend">`];
    legendParts.push(`<rect x="${legendX - 6}" y="${legendY - 11}" width="170" ` +
      `height="${entries.length * 16 + 8}" fill="white" fill-opacity="0.85" stroke="#999"/>`);
    for (const entry of entries) {
      if (entry.shape) {
        legendParts.push(`<g fill="${entry.shape === "cross" ? "none" : entry.color}" ` +
          `stroke="${entry.color}">${markerPath(entry.shape, legendX + 9, legendY - 3, 4)}</g>`);
      } else {
        const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
        legendParts.push(`<line x1="${legendX}" y1="${legendY - 3}" x2="${legendX + 18}" ` +
          `y2="${legendY - 3}" stroke="${entry.color}" stroke-width="1.6"${dash}/>`);
      }
      legendParts.push(`<text x="${legendX + 24}" y="${legendY}">${esc(entry.label)}</text>`);
      legendY += 16;
    }
    legendParts.push(`</g>`);
    parts.push(legendParts.join(""));

    parts.push(`</svg>`);
    return parts.join("\n");
  }
}
