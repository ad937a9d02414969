/**
 * UI session state: which handles are selected, the drawn query, mode and
 * window, and the per-index metric history behind the comparison panel.
 */

import type { IndexHandle, IndexStats, QueryResult } from "./api.js";

export interface WindowState {
  start: number;
  end: number;
}

export function validateWindow(start: number, end: number): WindowState {
  if (!Number.isFinite(start) || !Number.isFinite(end)) {
    throw new Error("window bounds must be numbers");
  }
  if (start > end) throw new Error(`window start ${start} > end ${end}`);
  if (start < 0) throw new Error("window start must be >= 0");
  return { start: Math.floor(start), end: Math.floor(end) };
}

export interface MetricPoint {
  at: number; // wall-clock ms, x axis only
  entryCount: number;
  sizeBytes: number;
  accepted: number;
}

/** Rolling per-index metric history; one point per ingest acknowledgement. */
export class MetricSeries {
  points: MetricPoint[] = [];

  constructor(private maxPoints = 200) {}

  record(stats: IndexStats, accepted: number, at = Date.now()): MetricPoint {
    const point: MetricPoint = {
      at,
      entryCount: stats.entry_count,
      sizeBytes: stats.size_bytes,
      accepted,
    };
    this.points.push(point);
    if (this.points.length > this.maxPoints) {
      this.points.splice(0, this.points.length - this.maxPoints);
    }
    return point;
  }

  latest(): MetricPoint | undefined {
    return this.points[this.points.length - 1];
  }
}

export interface ComparisonEntry {
  handle: IndexHandle;
  stats: IndexStats | null;
  lastResult: QueryResult | null;
  lastTraceId: string | null;
}

export class Session {
  datasetId: string | null = null;
  indexes = new Map<string, ComparisonEntry>();
  mode: "approximate" | "exact" = "exact";
  window: WindowState | null = null;
  drawnValues: number[] | null = null;
  metrics = new Map<string, MetricSeries>();

  addIndex(handle: IndexHandle): ComparisonEntry {
    const entry: ComparisonEntry = {
      handle,
      stats: null,
      lastResult: null,
      lastTraceId: null,
    };
    this.indexes.set(handle.id, entry);
    this.metrics.set(handle.id, new MetricSeries());
    return entry;
  }

  entry(id: string): ComparisonEntry {
    const found = this.indexes.get(id);
    if (!found) throw new Error(`no such index in session: ${id}`);
    return found;
  }
}
