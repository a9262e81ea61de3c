/**
 * Chart models for the facilitator dashboard.
 *
 * Every value plotted comes from the server's chart-series payloads; this
 * module only decides layout: grouped bars for small panels, box-plot
 * summaries for larger ones, and shaded regions at the fuzzy band cuts.
 */

import { ChartSeriesWire } from './api.js';

export interface Bands {
  low_cut: number;
  high_cut: number;
}

export const DEFAULT_BANDS: Bands = { low_cut: 0.3, high_cut: 0.7 };

export interface BandRegion {
  name: 'low' | 'moderate' | 'high';
  from: number;
  to: number;
  shade: string;
}

/** Shaded background regions for the 0-1 value axis. */
export function bandRegions(bands: Bands = DEFAULT_BANDS): BandRegion[] {
  return [
    { name: 'low', from: 0, to: bands.low_cut, shade: '#e8f4e8' },
    { name: 'moderate', from: bands.low_cut, to: bands.high_cut, shade: '#fdf3dc' },
    { name: 'high', from: bands.high_cut, to: 1, shade: '#fbe4e4' },
  ];
}

/**
 * Which shaded region a value falls in. Half-open bands, matching the
 * server's classifiers: low iff v <= low_cut, moderate iff v <= high_cut.
 */
export function regionFor(value: number, bands: Bands = DEFAULT_BANDS): BandRegion {
  if (value < 0 || value > 1) throw new RangeError(`value ${value} outside [0, 1]`);
  const regions = bandRegions(bands);
  if (value <= bands.low_cut) return regions[0];
  if (value <= bands.high_cut) return regions[1];
  return regions[2];
}

export type ChartMode = 'grouped-bars' | 'box-plot';

/** Grouped bars stay readable up to 3 analysts; box plots beyond that. */
export const BOX_PLOT_MIN_ANALYSTS = 4;

export function chartMode(analystCount: number): ChartMode {
  return analystCount >= BOX_PLOT_MIN_ANALYSTS ? 'box-plot' : 'grouped-bars';
}

export interface BoxStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

function quantile(sorted: number[], q: number): number {
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export function boxStats(values: number[]): BoxStats {
  if (values.length === 0) throw new RangeError('no values to summarize');
  const sorted = [...values].sort((a, b) => a - b);
  return {
    min: sorted[0],
    q1: quantile(sorted, 0.25),
    median: quantile(sorted, 0.5),
    q3: quantile(sorted, 0.75),
    max: sorted[sorted.length - 1],
  };
}

export interface GroupedBarsModel {
  mode: 'grouped-bars';
  labels: (string | number)[];
  bars: { name: string; values: number[] }[];
  group: number[];
  regions: BandRegion[];
}

export interface BoxPlotModel {
  mode: 'box-plot';
  labels: (string | number)[];
  boxes: BoxStats[];
  group: number[];
  regions: BandRegion[];
}

export type ChartModel = GroupedBarsModel | BoxPlotModel;

/** Turn one server chart payload into a renderable model. */
export function buildChartModel(payload: ChartSeriesWire): ChartModel {
  const bands = payload.bands ?? DEFAULT_BANDS;
  const regions = bandRegions(bands);
  if (chartMode(payload.series.length) === 'box-plot') {
    const boxes = payload.labels.map((_, i) =>
      boxStats(payload.series.map((s) => s.values[i])),
    );
    return { mode: 'box-plot', labels: payload.labels, boxes, group: payload.group, regions };
  }
  return {
    mode: 'grouped-bars',
    labels: payload.labels,
    bars: payload.series,
    group: payload.group,
    regions,
  };
}

export interface ConvergencePoint {
  round: number;
  distance: number;
}

export function convergenceLine(payload: ChartSeriesWire): ConvergencePoint[] {
  return payload.labels.map((label, i) => ({
    round: Number(label),
    distance: payload.group[i],
  }));
}
