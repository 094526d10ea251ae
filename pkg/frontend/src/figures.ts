/**
 * Figure builders over the campaign CSV schemas.
 *
 * Every figure is a pure function of the CSV rows and the spec; rate axes
 * are log-scaled with a 1e-4 floor so finite-sample zeros stay plottable.
 */

import { readAll } from "./csv";
import { HEIGHT, MARGIN, PALETTE, Svg, WIDTH, makeScale } from "./svg";

export type FigureKind = "rank-hist" | "geomean" | "md-curve" | "fa-curve" | "spectrum";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  logY?: boolean;
}

export const RATE_FLOOR = 1e-4;

const MD_FA_COLUMNS = ["strategy", "L", "genie", "trials", "failures",
  "p_md_mean", "p_md_stderr", "p_fa_mean", "p_fa_stderr"];
const PEP_COLUMNS = ["strategy", "L", "instance", "distortion", "rank",
  "geomean", "bound_product"];
const SPECTRUM_COLUMNS = ["tau_s", "p_mu"];

const X0 = MARGIN.left;
const X1 = WIDTH - MARGIN.right;
const Y0 = HEIGHT - MARGIN.bottom;
const Y1 = MARGIN.top;

interface Series {
  label: string;
  points: Array<[number, number]>;
}

function groupKey(row: Record<string, string>, keys: string[]): string {
  return keys.map((k) => row[k]).join("|");
}

function sortedUnique(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

// ── rate curves (md-curve / fa-curve) ───────────────────────────────────

function rateCurve(spec: FigureSpec, metric: "p_md_mean" | "p_fa_mean"): string {
  const rows = readAll(spec.inputs, MD_FA_COLUMNS);
  const logY = spec.logY ?? true;
  const title = metric === "p_md_mean"
    ? "Missed detection rate vs time slots"
    : "False alarm rate vs time slots";
  const svg = new Svg(title);
  if (rows.length === 0) {
    svg.warning("no data rows in " + spec.inputs.join(", "));
    return svg.toString();
  }
  const series = new Map<string, Series>();
  for (const row of rows) {
    const key = groupKey(row, ["strategy", "genie"]);
    const label = row.genie === "1" ? `${row.strategy} (genie)` : row.strategy;
    if (!series.has(key)) series.set(key, { label, points: [] });
    const rate = Math.max(Number(row[metric]), logY ? RATE_FLOOR : 0);
    series.get(key)!.points.push([Number(row.L), rate]);
  }
  const allL = sortedUnique(rows.map((r) => Number(r.L)));
  const xScale = makeScale(allL[0], allL[allL.length - 1], X0, X1);
  const yScale = logY
    ? makeScale(RATE_FLOOR, 1, Y0, Y1, true)
    : makeScale(0, 1, Y0, Y1);
  svg.axes(xScale, yScale, "time slots L",
    metric === "p_md_mean" ? "P_MD" : "P_FA");
  const labels: string[] = [];
  [...series.values()].forEach((s, i) => {
    s.points.sort((a, b) => a[0] - b[0]);
    svg.polyline(
      s.points.map(([x, y]) => [xScale.toPx(x), yScale.toPx(y)]),
      PALETTE[i % PALETTE.length], "series",
    );
    labels.push(s.label);
  });
  svg.legend(labels);
  return svg.toString();
}

// ── grouped rank histogram ──────────────────────────────────────────────

function rankHist(spec: FigureSpec): string {
  const rows = readAll(spec.inputs, PEP_COLUMNS);
  const svg = new Svg("Rank distribution of the squared beamspace difference");
  if (rows.length === 0) {
    svg.warning("no data rows in " + spec.inputs.join(", "));
    return svg.toString();
  }
  const groups = new Map<string, Map<number, number>>();
  const labels: string[] = [];
  for (const row of rows) {
    const key = `${row.strategy} L=${row.L}`;
    if (!groups.has(key)) {
      groups.set(key, new Map());
      labels.push(key);
    }
    const counts = groups.get(key)!;
    const rank = Number(row.rank);
    counts.set(rank, (counts.get(rank) ?? 0) + 1);
  }
  const ranks = sortedUnique(rows.map((r) => Number(r.rank)));
  const nGroups = groups.size;
  const slot = (X1 - X0) / ranks.length;
  const barWidth = (slot * 0.8) / nGroups;
  let maxFrac = 0;
  const totals = new Map<string, number>();
  for (const [key, counts] of groups) {
    const total = [...counts.values()].reduce((a, b) => a + b, 0);
    totals.set(key, total);
    for (const c of counts.values()) maxFrac = Math.max(maxFrac, c / total);
  }
  const yScale = makeScale(0, maxFrac, Y0, Y1);
  const xScale = makeScale(ranks[0] - 0.5, ranks[ranks.length - 1] + 0.5, X0, X1);
  svg.axes(xScale, yScale, "rank", "probability");
  labels.forEach((key, gi) => {
    const counts = groups.get(key)!;
    const total = totals.get(key)!;
    ranks.forEach((rank, ri) => {
      const frac = (counts.get(rank) ?? 0) / total;
      const x = X0 + ri * slot + slot * 0.1 + gi * barWidth;
      const y = yScale.toPx(frac);
      svg.bar(x, y, barWidth, Y0 - y, PALETTE[gi % PALETTE.length], "bar");
    });
  });
  svg.legend(labels);
  return svg.toString();
}

// ── geomean distribution (empirical CDF, log abscissa) ──────────────────

function geomeanCdf(spec: FigureSpec): string {
  const rows = readAll(spec.inputs, PEP_COLUMNS);
  const svg = new Svg("Geometric mean of nonzero eigenvalues (empirical CDF)");
  const values = rows.filter((r) => r.geomean !== "");
  if (values.length === 0) {
    svg.warning("no nonzero-rank rows in " + spec.inputs.join(", "));
    return svg.toString();
  }
  const groups = new Map<string, number[]>();
  const labels: string[] = [];
  for (const row of values) {
    const key = `${row.strategy} L=${row.L}`;
    if (!groups.has(key)) {
      groups.set(key, []);
      labels.push(key);
    }
    groups.get(key)!.push(Number(row.geomean));
  }
  const all = values.map((r) => Number(r.geomean));
  const xScale = makeScale(Math.min(...all), Math.max(...all), X0, X1, true);
  const yScale = makeScale(0, 1, Y0, Y1);
  svg.axes(xScale, yScale, "geometric mean", "fraction of distortions");
  labels.forEach((key, gi) => {
    const sorted = groups.get(key)!.sort((a, b) => a - b);
    const points: Array<[number, number]> = sorted.map((v, i) => [
      xScale.toPx(v), yScale.toPx((i + 1) / sorted.length),
    ]);
    svg.polyline(points, PALETTE[gi % PALETTE.length], "series");
  });
  svg.legend(labels);
  return svg.toString();
}

// ── delay pseudo-spectrum trace ─────────────────────────────────────────

function spectrum(spec: FigureSpec): string {
  const rows = readAll(spec.inputs, SPECTRUM_COLUMNS);
  const svg = new Svg("MUSIC delay pseudo-spectrum");
  if (rows.length === 0) {
    svg.warning("no data rows in " + spec.inputs.join(", "));
    return svg.toString();
  }
  const taus = rows.map((r) => Number(r.tau_s));
  const vals = rows.map((r) => Number(r.p_mu));
  const logY = spec.logY ?? true;
  const positive = vals.filter((v) => v > 0);
  const floor = positive.length ? Math.min(...positive) : 1;
  const xScale = makeScale(Math.min(...taus), Math.max(...taus), X0, X1);
  const yScale = logY
    ? makeScale(floor, Math.max(...vals), Y0, Y1, true)
    : makeScale(0, Math.max(...vals), Y0, Y1);
  svg.axes(xScale, yScale, "delay (s)", "P_MU");
  const points: Array<[number, number]> = rows.map((r) => [
    xScale.toPx(Number(r.tau_s)),
    yScale.toPx(Math.max(Number(r.p_mu), logY ? floor : 0)),
  ]);
  svg.polyline(points, PALETTE[0], "series");
  svg.legend(["pseudo-spectrum"]);
  return svg.toString();
}

// ── dispatch ────────────────────────────────────────────────────────────

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "md-curve":
      return rateCurve(spec, "p_md_mean");
    case "fa-curve":
      return rateCurve(spec, "p_fa_mean");
    case "rank-hist":
      return rankHist(spec);
    case "geomean":
      return geomeanCdf(spec);
    case "spectrum":
      return spectrum(spec);
    default:
      throw new Error(`unknown figure kind: ${(spec as FigureSpec).kind}`);
  }
}
