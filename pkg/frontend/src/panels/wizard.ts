/** Recommender wizard: workload profile form in, recommendation plus the
 * traversed decision path out. */

import type { ApiClient } from "../api.js";
import { el, labeled, numberInput, selectInput, statusLine } from "../dom.js";
import { DEFAULT_FORM, formToProfile, rationalePath, summaryLine, type WizardForm } from "../wizard.js";

export function wizardPanel(api: ApiClient): HTMLElement {
  const status = el("div", { class: "status" });
  const output = el("div", { class: "wizard-output" });

  const mode = selectInput(["static", "streaming"], DEFAULT_FORM.mode);
  const datasetGb = numberInput(DEFAULT_FORM.datasetGb, { step: "0.1", min: "0.01" });
  const memoryGb = numberInput(DEFAULT_FORM.memoryGb, { step: "0.05", min: "0.01" });
  const queries = numberInput(DEFAULT_FORM.expectedQueries, { min: "0" });
  const updateRate = numberInput(DEFAULT_FORM.updateRate, { min: "0" });
  const windowProfile = selectInput(["none", "short", "mixed", "long"],
    DEFAULT_FORM.windowProfile);
  const ask = el("button", {}, ["ask the recommender"]);

  mode.addEventListener("change", () => {
    if (mode.value === "static") updateRate.value = "0";
    else if (updateRate.valueAsNumber === 0) updateRate.value = "100";
  });

  ask.addEventListener("click", async () => {
    try {
      const form: WizardForm = {
        mode: mode.value as WizardForm["mode"],
        datasetGb: datasetGb.valueAsNumber,
        memoryGb: memoryGb.valueAsNumber,
        expectedQueries: queries.valueAsNumber,
        updateRate: updateRate.valueAsNumber,
        windowProfile: windowProfile.value as WizardForm["windowProfile"],
      };
      statusLine(status, "consulting...", "busy");
      const rec = await api.recommend(formToProfile(form));
      const steps = rationalePath(rec);
      output.replaceChildren(
        el("h3", {}, [`recommendation: ${summaryLine(rec)}`]),
        el("p", { class: "muted" },
          [`materialization break-even: ${rec.break_even_queries} queries`]),
        el("ol", { class: "rationale" },
          steps.map((s) => el("li", {}, [s.text]))),
      );
      statusLine(status, "decision path shown below");
    } catch (err) {
      statusLine(status, String(err), "err");
    }
  });

  return el("section", { class: "panel" }, [
    el("h2", {}, ["5. recommender wizard"]),
    el("div", { class: "row" }, [
      labeled("workload", mode),
      labeled("dataset GiB", datasetGb),
      labeled("memory GiB", memoryGb),
      labeled("expected queries", queries),
      labeled("updates/sec", updateRate),
      labeled("window profile", windowProfile),
      ask,
    ]),
    status,
    output,
  ]);
}
