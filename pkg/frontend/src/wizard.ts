/**
 * Recommender wizard model: form fields -> workload profile payload, plus the
 * shape of the rationale path rendered as the traversed decision chain.
 */

import type { Recommendation, WorkloadProfile } from "./api.js";

export interface WizardForm {
  mode: "static" | "streaming";
  datasetGb: number;
  memoryGb: number;
  expectedQueries: number;
  updateRate: number;
  windowProfile: "none" | "short" | "mixed" | "long";
}

export const DEFAULT_FORM: WizardForm = {
  mode: "static",
  datasetGb: 1,
  memoryGb: 0.25,
  expectedQueries: 100,
  updateRate: 0,
  windowProfile: "none",
};

export function formToProfile(form: WizardForm): WorkloadProfile {
  if (form.datasetGb <= 0 || form.memoryGb <= 0) {
    throw new Error("dataset and memory sizes must be positive");
  }
  if (form.mode === "static" && form.updateRate !== 0) {
    throw new Error("a static workload cannot have an update rate");
  }
  return {
    mode: form.mode,
    dataset_bytes: Math.round(form.datasetGb * 2 ** 30),
    memory_budget_bytes: Math.round(form.memoryGb * 2 ** 30),
    expected_query_count: Math.max(0, Math.floor(form.expectedQueries)),
    update_rate: form.updateRate,
    window_profile: form.windowProfile,
  };
}

export interface RationaleStep {
  ordinal: number;
  text: string;
}

/** The rationale list is the path of branches actually taken, in order. */
export function rationalePath(rec: Recommendation): RationaleStep[] {
  return rec.rationale.map((text, i) => ({ ordinal: i + 1, text }));
}

export function summaryLine(rec: Recommendation): string {
  const mat = rec.materialized ? "materialized" : "non-materialized";
  return `${rec.index}, ${mat}, ${rec.strategy}`;
}
