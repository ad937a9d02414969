/** Query canvas: draw a series by hand, resample it to the index length, and
 * issue approximate/exact, optionally windowed, queries against every index
 * in the session, overlaying each returned neighbor on the drawing. */

import type { ApiClient } from "../api.js";
import { drawSeriesOverlay } from "../charts.js";
import { el, labeled, numberInput, selectInput, statusLine } from "../dom.js";
import { strokeToValues, type Point } from "../resample.js";
import { validateWindow, type Session } from "../session.js";

const RESULT_COLORS = ["#d1495b", "#7fb069", "#e9b44c", "#9b5de5", "#00bbf9"];

export function queryPanel(
  api: ApiClient,
  session: Session,
  onResults: () => void,
): HTMLElement {
  const canvas = el("canvas", { width: "640", height: "200", class: "draw" });
  const overlay = el("canvas", { width: "640", height: "200", class: "overlay" });
  const status = el("div", { class: "status" });
  const results = el("div", { class: "results" });
  const mode = selectInput(["exact", "approximate"], "exact");
  const windowed = el("input", { type: "checkbox" });
  const winStart = numberInput(0, { min: "0" });
  const winEnd = numberInput(1000, { min: "0" });
  const clearButton = el("button", {}, ["clear"]);
  const submitButton = el("button", {}, ["run query"]);

  let stroke: Point[] = [];
  let drawing = false;
  const ctx = canvas.getContext("2d");

  function redrawStroke(): void {
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#e0e0e0";
    ctx.lineWidth = 2;
    ctx.beginPath();
    stroke.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
  }

  canvas.addEventListener("pointerdown", (e) => {
    drawing = true;
    stroke = [{ x: e.offsetX, y: e.offsetY }];
    redrawStroke();
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!drawing) return;
    stroke.push({ x: e.offsetX, y: e.offsetY });
    redrawStroke();
  });
  for (const evt of ["pointerup", "pointerleave"]) {
    canvas.addEventListener(evt, () => {
      drawing = false;
    });
  }
  clearButton.addEventListener("click", () => {
    stroke = [];
    redrawStroke();
    overlay.getContext("2d")?.clearRect(0, 0, overlay.width, overlay.height);
  });

  submitButton.addEventListener("click", async () => {
    try {
      if (stroke.length === 0) throw new Error("draw a query first");
      if (session.indexes.size === 0) throw new Error("build an index first");
      const window = windowed.checked
        ? validateWindow(winStart.valueAsNumber, winEnd.valueAsNumber)
        : null;
      session.window = window;
      session.mode = mode.value as "exact" | "approximate";
      results.replaceChildren();
      const overlays: { values: number[]; style: { color: string }; label: string }[] = [];
      let colorIdx = 0;
      for (const entry of session.indexes.values()) {
        const n = entry.handle.config.n;
        // the resampling contract: the request body carries exactly n values
        const values = strokeToValues(stroke, canvas.height, n);
        session.drawnValues = values;
        statusLine(status, `querying ${entry.handle.id}...`, "busy");
        const res = await api.query(entry.handle.id, values, session.mode, window);
        entry.lastResult = res;
        entry.lastTraceId = res.trace_id ?? null;
        const color = RESULT_COLORS[colorIdx++ % RESULT_COLORS.length]!;
        if (!res.found) {
          results.append(el("div", {}, [`${entry.handle.id}: nothing inside the window`]));
          continue;
        }
        results.append(
          el("div", { class: "result" }, [
            el("span", { class: "swatch", style: `background:${color}` }, []),
            `${entry.handle.id}: series ${res.series_id} at distance ` +
              `${res.distance?.toFixed(4)} (ts ${res.timestamp}, ` +
              `${res.exact ? "exact" : "approximate"})`,
          ]),
        );
        if (res.values) {
          overlays.push({ values: res.values, style: { color }, label: entry.handle.id });
        }
      }
      if (session.drawnValues) {
        overlays.unshift({
          values: session.drawnValues,
          style: { color: "#e0e0e0" },
          label: "drawn query",
        });
      }
      drawSeriesOverlay(overlay, overlays);
      statusLine(status, "done; traces ready for the heat map panel");
      onResults();
    } catch (err) {
      statusLine(status, String(err), "err");
    }
  });

  return el("section", { class: "panel" }, [
    el("h2", {}, ["2. draw a query"]),
    el("div", { class: "row" }, [
      labeled("mode", mode),
      labeled("windowed", windowed),
      labeled("window start", winStart),
      labeled("window end", winEnd),
      clearButton,
      submitButton,
    ]),
    el("div", { class: "canvases" }, [canvas, overlay]),
    status,
    results,
  ]);
}
