/** Configure-and-build panel: dataset creation plus async index builds with
 * live status polling, and the construction-metrics comparison table. */

import type { ApiClient, IndexKind, Strategy } from "../api.js";
import { el, labeled, numberInput, selectInput, statusLine } from "../dom.js";
import type { Session } from "../session.js";

export function buildPanel(
  api: ApiClient,
  session: Session,
  onIndexesChanged: () => void,
): HTMLElement {
  const status = el("div", { class: "status" });
  const table = el("table", { class: "stats" });

  const dsCount = numberInput(5000, { min: "1" });
  const dsLength = numberInput(256, { min: "8" });
  const dsSeed = numberInput(7);
  const dsButton = el("button", {}, ["create dataset"]);

  const kind = selectInput(["ctree", "clsm"], "ctree");
  const strategy = selectInput(["PP", "TP", "BTP"], "PP");
  const segments = numberInput(16, { min: "1", max: "64" });
  const bits = numberInput(8, { min: "1", max: "16" });
  const materialized = el("input", { type: "checkbox" });
  const fill = numberInput(1.0, { step: "0.05", min: "0.05", max: "1" });
  const growth = numberInput(3, { min: "2" });
  const budgetMb = numberInput(64, { min: "1" });
  const bufferKb = numberInput(4096, { min: "8" });
  const buildButton = el("button", {}, ["build index"]);

  async function refreshTable(): Promise<void> {
    table.replaceChildren(
      el("tr", {}, [
        el("th", {}, ["index"]),
        el("th", {}, ["status"]),
        el("th", {}, ["entries"]),
        el("th", {}, ["size (bytes)"]),
        el("th", {}, ["build (s)"]),
        el("th", {}, ["seq read"]),
        el("th", {}, ["rand read"]),
      ]),
    );
    for (const entry of session.indexes.values()) {
      const h = entry.handle;
      const cells = [
        `${h.id} (${h.kind}/${h.strategy}${h.config.materialized ? "/mat" : ""})`,
        h.status,
      ];
      if (entry.stats) {
        cells.push(
          String(entry.stats.entry_count),
          entry.stats.size_bytes.toLocaleString(),
          entry.stats.build_seconds.toFixed(2),
          entry.stats.counters.seq_read_bytes.toLocaleString(),
          entry.stats.counters.rand_read_bytes.toLocaleString(),
        );
      } else {
        cells.push("-", "-", "-", "-", "-");
      }
      table.append(el("tr", {}, cells.map((c) => el("td", {}, [c]))));
    }
  }

  dsButton.addEventListener("click", async () => {
    try {
      statusLine(status, "creating dataset...", "busy");
      const ds = await api.createGeneratedDataset(
        dsCount.valueAsNumber,
        dsLength.valueAsNumber,
        dsSeed.valueAsNumber,
      );
      session.datasetId = ds.id;
      statusLine(status, `dataset ${ds.id}: ${ds.count} series of length ${ds.length}`);
    } catch (err) {
      statusLine(status, String(err), "err");
    }
  });

  buildButton.addEventListener("click", async () => {
    try {
      const spec = {
        dataset_id: session.datasetId,
        kind: kind.value as IndexKind,
        strategy: strategy.value as Strategy,
        w: segments.valueAsNumber,
        b: bits.valueAsNumber,
        materialized: materialized.checked,
        fill_factor: fill.valueAsNumber,
        growth_factor: growth.valueAsNumber,
        memory_budget_bytes: budgetMb.valueAsNumber * 1024 * 1024,
        buffer_bytes: bufferKb.valueAsNumber * 1024,
      };
      statusLine(status, "build submitted; polling status...", "busy");
      let handle = await api.createIndex(spec);
      const entry = session.addIndex(handle);
      await refreshTable();
      handle = await api.pollUntilReady(handle.id);
      entry.handle = handle;
      entry.stats = await api.getStats(handle.id);
      statusLine(status, `index ${handle.id} ready`);
      await refreshTable();
      onIndexesChanged();
    } catch (err) {
      statusLine(status, String(err), "err");
    }
  });

  return el("section", { class: "panel" }, [
    el("h2", {}, ["1. data and index construction"]),
    el("div", { class: "row" }, [
      labeled("series count", dsCount),
      labeled("length n", dsLength),
      labeled("seed", dsSeed),
      dsButton,
    ]),
    el("div", { class: "row" }, [
      labeled("kind", kind),
      labeled("strategy", strategy),
      labeled("segments w", segments),
      labeled("bits b", bits),
      labeled("materialized", materialized),
      labeled("fill factor", fill),
      labeled("growth T", growth),
      labeled("budget MiB", budgetMb),
      labeled("buffer KiB", bufferKb),
      buildButton,
    ]),
    status,
    table,
  ]);
}
