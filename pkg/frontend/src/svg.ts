/**
 * Tiny deterministic SVG scene builder: fixed canvas, numeric axes with
 * optional log scaling, polylines, grouped bars, legend. No timestamps,
 * no randomness; coordinates rounded to two decimals so output bytes are
 * stable for identical inputs.
 */

export const WIDTH = 800;
export const HEIGHT = 500;
export const MARGIN = { left: 70, right: 170, top: 40, bottom: 55 };

export const PALETTE = [
  "#0173b2", "#de8f05", "#029e73", "#d55e00", "#cc78bc",
  "#ca9161", "#56b4e9", "#949494",
];

const fmt = (x: number): string => x.toFixed(2);

export interface Scale {
  toPx(value: number): number;
  ticks(): number[];
  readonly log: boolean;
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(v);
  }
  return ticks;
}

export function makeScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
  log = false,
): Scale {
  if (log) {
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi > lo ? hi : lo * 10);
    return {
      log: true,
      toPx: (v) => pxLo + ((Math.log10(v) - llo) / (lhi - llo)) * (pxHi - pxLo),
      ticks: () => {
        const out: number[] = [];
        for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += 1) out.push(Math.pow(10, e));
        return out;
      },
    };
  }
  const span = hi > lo ? hi - lo : 1;
  return {
    log: false,
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: () => linearTicks(lo, hi),
  };
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(4)));
}

export class Svg {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${escapeXml(title)}</text>`,
    );
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string): void {
    const { left, right, top, bottom } = MARGIN;
    const x0 = left;
    const x1 = WIDTH - right;
    const y0 = HEIGHT - bottom;
    const y1 = top;
    this.parts.push(
      `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
      `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
    );
    for (const t of xScale.ticks()) {
      const px = xScale.toPx(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.parts.push(
        `<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`,
        `<text x="${fmt(px)}" y="${y0 + 20}" text-anchor="middle" font-size="11">` +
        `${formatTick(t)}</text>`,
      );
    }
    for (const t of yScale.ticks()) {
      const py = yScale.toPx(t);
      if (py > y0 + 0.5 || py < y1 - 0.5) continue;
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`,
        `<text x="${x0 - 9}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">` +
        `${formatTick(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">` +
      `${escapeXml(xLabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  polyline(points: Array<[number, number]>, color: string, cssClass: string): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline class="${cssClass}" fill="none" stroke="${color}" stroke-width="2" ` +
      `points="${path}"/>`,
    );
    for (const [x, y] of points) {
      this.parts.push(
        `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="3" fill="${color}"/>`,
      );
    }
  }

  bar(x: number, y: number, w: number, h: number, color: string, cssClass: string): void {
    this.parts.push(
      `<rect class="${cssClass}" x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" ` +
      `height="${fmt(h)}" fill="${color}"/>`,
    );
  }

  legend(labels: string[]): void {
    const x = WIDTH - MARGIN.right + 12;
    labels.forEach((label, i) => {
      const y = MARGIN.top + 16 + i * 20;
      const color = PALETTE[i % PALETTE.length];
      this.parts.push(
        `<rect x="${x}" y="${y - 9}" width="12" height="12" fill="${color}"/>`,
        `<text x="${x + 18}" y="${y + 2}" font-size="12">${escapeXml(label)}</text>`,
      );
    });
  }

  warning(message: string): void {
    this.parts.push(
      `<text class="warning" x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" ` +
      `font-size="14" fill="#b00">${escapeXml(message)}</text>`,
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
