/** Data-to-geometry models for the value plots. All pure; the renderer only
 * turns these into SVG. Non-finite sentinels show up as annotated categories
 * next to a histogram rather than vanishing. */

import { JoinTuple, PlotGroup, ValueRow, WireValue, isNonFinite, isNumeric } from "./types.js";

export interface HistogramBin {
  x0: number;
  x1: number;
  count: number;
  ids: number[];
}

export interface SpecialBar {
  label: string;
  count: number;
  ids: number[];
}

export interface HistogramModel {
  bins: HistogramBin[];
  specials: SpecialBar[]; // NaN / Inf / -Inf annotated categories
}

export function histogram(rows: ValueRow[], binCount = 20): HistogramModel {
  const numeric = rows.filter((r) => isNumeric(r.value));
  const specials = new Map<string, number[]>();
  for (const row of rows) {
    if (isNonFinite(row.value)) {
      const ids = specials.get(row.value) ?? [];
      ids.push(row.id);
      specials.set(row.value, ids);
    }
  }
  const model: HistogramModel = {
    bins: [],
    specials: [...specials.entries()].map(([label, ids]) => ({ label, count: ids.length, ids })),
  };
  if (!numeric.length) return model;
  const values = numeric.map((r) => r.value as number);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const width = span / binCount;
  for (let i = 0; i < binCount; i++) {
    model.bins.push({ x0: lo + i * width, x1: lo + (i + 1) * width, count: 0, ids: [] });
  }
  for (const row of numeric) {
    const v = row.value as number;
    const idx = Math.min(binCount - 1, Math.floor((v - lo) / width));
    model.bins[idx].count += 1;
    model.bins[idx].ids.push(row.id);
  }
  return model;
}

export interface BarModel {
  bars: { key: string; count: number; ids: number[] }[];
}

export function bar(rows: ValueRow[]): BarModel {
  const byKey = new Map<string, number[]>();
  const order: string[] = [];
  for (const row of rows) {
    const key = String(row.value);
    if (!byKey.has(key)) {
      byKey.set(key, []);
      order.push(key);
    }
    byKey.get(key)!.push(row.id);
  }
  return { bars: order.map((key) => ({ key, count: byKey.get(key)!.length, ids: byKey.get(key)! })) };
}

export interface ScatterPoint {
  x: number;
  y: number;
  ids: number[]; // row ids backing this point (1 for time scatter, 2 for joins)
}

export interface ScatterModel {
  points: ScatterPoint[];
  skipped: number; // rows not representable on numeric axes
}

/** Single variable over time: x is the timestamp, y the value. */
export function scatterOverTime(rows: ValueRow[]): ScatterModel {
  const points: ScatterPoint[] = [];
  let skipped = 0;
  for (const row of rows) {
    if (isNumeric(row.value)) points.push({ x: row.ts, y: row.value, ids: [row.id] });
    else skipped += 1;
  }
  return { points, skipped };
}

/** Two joined variables, one point per common-ancestor instance. */
export function scatterJoin(tuples: JoinTuple[]): ScatterModel {
  const points: ScatterPoint[] = [];
  let skipped = 0;
  for (const t of tuples) {
    const [a, b] = t.values;
    if (isNumeric(a.value) && isNumeric(b.value)) {
      points.push({ x: a.value, y: b.value, ids: [a.id, b.id] });
    } else skipped += 1;
  }
  return { points, skipped };
}

export interface ParallelModel {
  axes: string[];
  lines: { instance: number; coords: number[]; ids: number[] }[];
}

export function parallelCoordinates(tuples: JoinTuple[], names: string[]): ParallelModel {
  const lines = tuples
    .filter((t) => t.values.every((v) => isNumeric(v.value)))
    .map((t) => ({
      instance: t.instance,
      coords: t.values.map((v) => v.value as number),
      ids: t.values.map((v) => v.id),
    }));
  return { axes: names, lines };
}

export interface BoxStats {
  key: string;
  n: number;
  lo: number;
  q1: number;
  median: number;
  q3: number;
  hi: number;
}

function quantile(sorted: number[], q: number): number {
  if (!sorted.length) return NaN;
  const pos = (sorted.length - 1) * q;
  const base = Math.floor(pos);
  const rest = pos - base;
  const next = sorted[Math.min(base + 1, sorted.length - 1)];
  return sorted[base] + rest * (next - sorted[base]);
}

/** One box per group; groups arrive ordered by first timestamp. */
export function boxes(groups: PlotGroup[]): BoxStats[] {
  const out: BoxStats[] = [];
  for (const group of groups) {
    const values = group.rows.map((r) => r.value).filter(isNumeric).sort((a, b) => a - b);
    if (!values.length) continue;
    out.push({
      key: group.key,
      n: values.length,
      lo: values[0],
      q1: quantile(values, 0.25),
      median: quantile(values, 0.5),
      q3: quantile(values, 0.75),
      hi: values[values.length - 1],
    });
  }
  return out;
}

export interface SmallMultiplesModel {
  panels: { key: string; scatter: ScatterModel }[];
}

export function smallMultiples(groups: PlotGroup[]): SmallMultiplesModel {
  return { panels: groups.map((g) => ({ key: g.key, scatter: scatterOverTime(g.rows) })) };
}

/** Symmetric log for axes that must show oscillation around zero. */
export function symlog(v: number, linthresh = 1): number {
  const sign = v < 0 ? -1 : 1;
  return sign * Math.log10(1 + Math.abs(v) / linthresh);
}

export interface AxisScale {
  domain: [number, number];
  apply: (v: number) => number; // domain -> [0, 1]
}

export function linearScale(lo: number, hi: number): AxisScale {
  const span = hi - lo || 1;
  return { domain: [lo, hi], apply: (v) => (v - lo) / span };
}

export function symlogScale(lo: number, hi: number, linthresh = 1): AxisScale {
  const tlo = symlog(lo, linthresh);
  const thi = symlog(hi, linthresh);
  const span = thi - tlo || 1;
  return { domain: [lo, hi], apply: (v) => (symlog(v, linthresh) - tlo) / span };
}

/** Numeric extent of a row set; the axes must equal the data extents. */
export function extent(rows: ValueRow[]): [number, number] | null {
  const nums = rows.map((r) => r.value).filter(isNumeric);
  if (!nums.length) return null;
  return [Math.min(...nums), Math.max(...nums)];
}
