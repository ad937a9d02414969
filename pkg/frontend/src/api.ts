/**
 * Typed client for the series-search service.
 *
 * Strictly a transport layer: every number the UI displays originates from a
 * response body here. No distances, bounds, or index math are computed client
 * side (the test suite scans this file to keep it that way).
 */

export interface DatasetHandle {
  id: string;
  source: "generated" | "uploaded";
  length: number;
  count: number;
  name: string | null;
  status: string;
}

export type IndexKind = "ctree" | "clsm";
export type Strategy = "PP" | "TP" | "BTP";
export type IndexStatus = "building" | "ready" | "ingesting" | "error";

export interface IndexSpec {
  dataset_id?: string | null;
  kind: IndexKind;
  strategy?: Strategy;
  w?: number;
  b?: number;
  materialized?: boolean;
  page_size?: number;
  fill_factor?: number;
  growth_factor?: number;
  memory_budget_bytes?: number;
  buffer_bytes?: number;
}

export interface IndexHandle {
  id: string;
  status: IndexStatus;
  kind: IndexKind;
  strategy: Strategy;
  dataset_id: string | null;
  config: { n: number; w: number; b: number; page_size: number; materialized: boolean };
  fill_factor: number;
  growth_factor: number;
  memory_budget_bytes: number;
  buffer_bytes: number;
  error: string | null;
}

export interface IndexStats {
  id: string;
  build_seconds: number;
  entry_count: number;
  size_bytes: number;
  counters: {
    seq_read_bytes: number;
    rand_read_bytes: number;
    seq_write_bytes: number;
    rand_write_bytes: number;
    read_passes: number;
  };
}

export interface QueryWindow {
  start: number;
  end: number;
}

export interface QueryResult {
  found: boolean;
  series_id?: number;
  distance?: number;
  exact?: boolean;
  timestamp?: number;
  values?: number[] | null;
  trace_id?: string;
}

export interface TraceEvent {
  file: string;
  page: number;
  kind: "opened_partition" | "lower_bound_only" | "raw_fetch" | "skipped_partition";
}

export interface Trace {
  trace_id: string;
  query_id: string;
  events: TraceEvent[];
}

export interface WorkloadProfile {
  mode: "static" | "streaming";
  dataset_bytes: number;
  memory_budget_bytes: number;
  expected_query_count: number;
  update_rate?: number;
  window_profile?: "none" | "short" | "mixed" | "long";
}

export interface Recommendation {
  index: "CTree" | "CLSM";
  materialized: boolean;
  strategy: Strategy;
  rationale: string[];
  break_even_queries: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const payload = await res.json();
        detail = typeof payload.detail === "string" ? payload.detail : JSON.stringify(payload.detail);
      } catch {
        /* plain-text error body */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createGeneratedDataset(count: number, length: number, seed: number, name?: string) {
    return this.request<DatasetHandle>("POST", "/datasets", {
      source: "generated",
      count,
      length,
      seed,
      name,
    });
  }

  createUploadedDataset(length: number, series: number[][], name?: string) {
    return this.request<DatasetHandle>("POST", "/datasets", {
      source: "uploaded",
      length,
      series,
      name,
    });
  }

  getDataset(id: string) {
    return this.request<DatasetHandle>("GET", `/datasets/${id}`);
  }

  listDatasets() {
    return this.request<DatasetHandle[]>("GET", "/datasets");
  }

  createIndex(spec: IndexSpec) {
    return this.request<IndexHandle>("POST", "/indexes", spec);
  }

  getIndex(id: string) {
    return this.request<IndexHandle>("GET", `/indexes/${id}`);
  }

  listIndexes() {
    return this.request<IndexHandle[]>("GET", "/indexes");
  }

  getStats(id: string) {
    return this.request<IndexStats>("GET", `/indexes/${id}/stats`);
  }

  ingest(id: string, series: { values: number[]; id?: number; timestamp?: number }[]) {
    return this.request<{ accepted: number }>("POST", `/indexes/${id}/ingest`, { series });
  }

  query(
    id: string,
    values: number[],
    mode: "approximate" | "exact",
    window?: QueryWindow | null,
  ) {
    return this.request<QueryResult>("POST", `/indexes/${id}/query`, {
      values,
      mode,
      window: window ?? null,
    });
  }

  getTrace(traceId: string) {
    return this.request<Trace>("GET", `/traces/${traceId}`);
  }

  recommend(profile: WorkloadProfile) {
    return this.request<Recommendation>("POST", "/recommend", profile);
  }

  /** Status polling (the build endpoint is asynchronous by design). */
  async pollUntilReady(
    id: string,
    opts: { intervalMs?: number; timeoutMs?: number } = {},
  ): Promise<IndexHandle> {
    const interval = opts.intervalMs ?? 250;
    const deadline = Date.now() + (opts.timeoutMs ?? 120_000);
    for (;;) {
      const handle = await this.getIndex(id);
      if (handle.status === "ready") return handle;
      if (handle.status === "error") {
        throw new ApiError(500, handle.error ?? "index build failed");
      }
      if (Date.now() > deadline) {
        throw new ApiError(408, `index ${id} still ${handle.status} after timeout`);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
