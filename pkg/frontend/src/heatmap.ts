/**
 * Grid model for rendering a query's access trace as a heat map: one row per
 * file, one cell per storage page, colored by what happened there.
 */

import type { Trace, TraceEvent } from "./api.js";

export type CellKind = TraceEvent["kind"];

/** Later kinds win when a page saw several event kinds. */
const PRECEDENCE: CellKind[] = [
  "skipped_partition",
  "lower_bound_only",
  "opened_partition",
  "raw_fetch",
];

export const CELL_COLORS: Record<CellKind, string> = {
  skipped_partition: "#3d4f63",
  lower_bound_only: "#7fb069",
  opened_partition: "#e9b44c",
  raw_fetch: "#d1495b",
};

export const CELL_LABELS: Record<CellKind, string> = {
  skipped_partition: "partition skipped via its time range",
  lower_bound_only: "page fully pruned by lower bounds",
  opened_partition: "page opened for candidates",
  raw_fetch: "raw series fetched",
};

export interface HeatCell {
  page: number;
  kind: CellKind;
  count: number;
}

export interface HeatRow {
  file: string;
  /** Whole-file skip (TP/BTP time pruning) rather than page-level activity. */
  skipped: boolean;
  width: number;
  cells: HeatCell[];
}

export interface HeatGrid {
  rows: HeatRow[];
  totals: Record<CellKind, number>;
}

export function buildHeatGrid(trace: Trace): HeatGrid {
  const files = new Map<string, Map<number, { kind: CellKind; count: number }>>();
  const totals: Record<CellKind, number> = {
    skipped_partition: 0,
    lower_bound_only: 0,
    opened_partition: 0,
    raw_fetch: 0,
  };
  for (const event of trace.events) {
    totals[event.kind] += 1;
    let pages = files.get(event.file);
    if (!pages) {
      pages = new Map();
      files.set(event.file, pages);
    }
    const cell = pages.get(event.page);
    if (!cell) {
      pages.set(event.page, { kind: event.kind, count: 1 });
    } else {
      cell.count += 1;
      if (PRECEDENCE.indexOf(event.kind) > PRECEDENCE.indexOf(cell.kind)) {
        cell.kind = event.kind;
      }
    }
  }
  const rows: HeatRow[] = [];
  for (const [file, pages] of [...files.entries()].sort((a, b) => a[0].localeCompare(b[0]))) {
    const cells = [...pages.entries()]
      .map(([page, cell]) => ({ page, kind: cell.kind, count: cell.count }))
      .sort((a, b) => a.page - b.page);
    const skipped = cells.every((c) => c.kind === "skipped_partition");
    rows.push({
      file,
      skipped,
      width: cells.length ? cells[cells.length - 1]!.page + 1 : 0,
      cells,
    });
  }
  return { rows, totals };
}
