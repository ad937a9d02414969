/** Streaming panel: feed synthetic batches into a selected index and chart
 * the ingest metrics reported back by the service after every batch. */

import type { ApiClient } from "../api.js";
import { drawMetricChart } from "../charts.js";
import { el, labeled, numberInput, statusLine } from "../dom.js";
import type { Session } from "../session.js";
import { MetricSeries } from "../session.js";

/** Client-side random walk used purely as a data source for the feed. */
export function randomWalk(length: number): number[] {
  const out = new Array<number>(length);
  let acc = 0;
  for (let i = 0; i < length; i++) {
    acc += (Math.random() - 0.5) * 2;
    out[i] = acc;
  }
  return out;
}

export function streamPanel(api: ApiClient, session: Session): HTMLElement {
  const status = el("div", { class: "status" });
  const target = el("select");
  const batchSize = numberInput(50, { min: "1" });
  const startButton = el("button", {}, ["start stream"]);
  const stopButton = el("button", {}, ["stop"]);
  const entriesChart = el("canvas", { width: "320", height: "110" });
  const sizeChart = el("canvas", { width: "320", height: "110" });
  let timer: number | null = null;

  function refreshTargets(): void {
    target.replaceChildren();
    for (const entry of session.indexes.values()) {
      if (entry.handle.kind === "clsm") {
        target.append(el("option", { value: entry.handle.id }, [entry.handle.id]));
      }
    }
  }

  async function feedOnce(): Promise<void> {
    const id = target.value;
    if (!id) throw new Error("build a clsm index to stream into");
    const entry = session.entry(id);
    const n = entry.handle.config.n;
    const batch = Array.from({ length: batchSize.valueAsNumber }, () => ({
      values: randomWalk(n),
    }));
    const ack = await api.ingest(id, batch);
    const stats = await api.getStats(id);
    entry.stats = stats;
    let series = session.metrics.get(id);
    if (!series) {
      series = new MetricSeries();
      session.metrics.set(id, series);
    }
    // charts update strictly from the per-ingest response cycle
    series.record(stats, ack.accepted);
    drawMetricChart(entriesChart, series.points, (p) => p.entryCount, "#7fb069",
      "entries indexed");
    drawMetricChart(sizeChart, series.points, (p) => p.sizeBytes, "#e9b44c",
      "on-disk bytes");
    statusLine(status, `accepted ${ack.accepted}; total entries ${stats.entry_count}`);
  }

  startButton.addEventListener("click", () => {
    if (timer !== null) return;
    refreshTargets();
    timer = window.setInterval(() => {
      feedOnce().catch((err) => {
        statusLine(status, String(err), "err");
        if (timer !== null) window.clearInterval(timer);
        timer = null;
      });
    }, 700);
    statusLine(status, "streaming...", "busy");
  });
  stopButton.addEventListener("click", () => {
    if (timer !== null) window.clearInterval(timer);
    timer = null;
    statusLine(status, "stream stopped");
  });

  const element = el("section", { class: "panel" }, [
    el("h2", {}, ["4. stream batches"]),
    el("div", { class: "row" }, [
      labeled("into", target),
      labeled("batch size", batchSize),
      startButton,
      stopButton,
    ]),
    el("div", { class: "row" }, [entriesChart, sizeChart]),
    status,
  ]);
  element.addEventListener("indexes-changed", refreshTargets);
  return element;
}
