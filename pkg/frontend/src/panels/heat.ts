/** Heat map panel: the last query's page accesses per index, side by side,
 * rendered from trace events alone. */

import type { ApiClient } from "../api.js";
import { el, statusLine } from "../dom.js";
import { buildHeatGrid, CELL_COLORS, CELL_LABELS, type HeatGrid } from "../heatmap.js";
import type { Session } from "../session.js";

const CELL = 9;

function renderGrid(grid: HeatGrid): HTMLElement {
  const container = el("div", { class: "heatgrid" });
  for (const row of grid.rows) {
    const canvas = el("canvas", {
      width: String(Math.max(1, row.width) * CELL),
      height: String(CELL + 2),
    });
    const ctx = canvas.getContext("2d");
    if (ctx) {
      for (const cell of row.cells) {
        ctx.fillStyle = CELL_COLORS[cell.kind];
        ctx.fillRect(cell.page * CELL, 0, CELL - 1, CELL);
      }
    }
    container.append(
      el("div", { class: "heatrow" }, [
        el("span", { class: "heatfile" }, [row.skipped ? `${row.file} (skipped)` : row.file]),
        canvas,
      ]),
    );
  }
  const totals = el("div", { class: "heattotals" });
  for (const [kind, count] of Object.entries(grid.totals)) {
    if (!count) continue;
    totals.append(
      el("span", { class: "legend" }, [
        el("span", {
          class: "swatch",
          style: `background:${CELL_COLORS[kind as keyof typeof CELL_COLORS]}`,
        }, []),
        `${count} × ${CELL_LABELS[kind as keyof typeof CELL_LABELS]}`,
      ]),
    );
  }
  container.append(totals);
  return container;
}

export function heatPanel(api: ApiClient, session: Session): {
  element: HTMLElement;
  refresh: () => Promise<void>;
} {
  const status = el("div", { class: "status" });
  const grids = el("div", { class: "heatgrids" });

  async function refresh(): Promise<void> {
    grids.replaceChildren();
    let shown = 0;
    for (const entry of session.indexes.values()) {
      if (!entry.lastTraceId) continue;
      try {
        const trace = await api.getTrace(entry.lastTraceId);
        const block = el("div", { class: "heatblock" }, [
          el("h3", {}, [`${entry.handle.id} (${entry.handle.kind}/${entry.handle.strategy})`]),
          renderGrid(buildHeatGrid(trace)),
        ]);
        grids.append(block);
        shown += 1;
      } catch (err) {
        statusLine(status, String(err), "err");
      }
    }
    if (shown) statusLine(status, `${shown} trace(s); one cell per storage page`);
    else statusLine(status, "run a query to populate heat maps");
  }

  const element = el("section", { class: "panel" }, [
    el("h2", {}, ["3. access-pattern heat map"]),
    status,
    grids,
  ]);
  return { element, refresh };
}
