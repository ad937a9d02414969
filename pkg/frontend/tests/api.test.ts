import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function mockFetch(handler: (url: string, init?: RequestInit) => Response): {
  fetch: FetchLike;
  calls: { url: string; init?: RequestInit }[];
} {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetch: FetchLike = async (url, init) => {
    calls.push({ url, init });
    return handler(url, init);
  };
  return { fetch, calls };
}

describe("ApiClient", () => {
  it("posts the drawn query with mode and window", async () => {
    const { fetch, calls } = mockFetch(() =>
      jsonResponse({ found: true, series_id: 3, distance: 1.5, exact: true }));
    const api = new ApiClient("http://host", fetch);
    const res = await api.query("ix-1", [1, 2, 3], "exact", { start: 5, end: 9 });
    expect(res.series_id).toBe(3);
    expect(calls[0]!.url).toBe("http://host/indexes/ix-1/query");
    const body = JSON.parse(String(calls[0]!.init?.body));
    expect(body).toEqual({
      values: [1, 2, 3],
      mode: "exact",
      window: { start: 5, end: 9 },
    });
  });

  it("omits the window as null for whole-history queries", async () => {
    const { fetch, calls } = mockFetch(() => jsonResponse({ found: true }));
    const api = new ApiClient("http://host", fetch);
    await api.query("ix-1", [1], "approximate");
    expect(JSON.parse(String(calls[0]!.init?.body)).window).toBeNull();
  });

  it("wraps http errors with the service detail", async () => {
    const { fetch } = mockFetch(() =>
      jsonResponse({ detail: "index is still building" }, 409));
    const api = new ApiClient("http://host", fetch);
    await expect(api.getStats("ix-1")).rejects.toThrowError(ApiError);
    await expect(api.getStats("ix-1")).rejects.toThrow("index is still building");
  });

  it("polls until the build turns ready", async () => {
    vi.useFakeTimers();
    try {
      let polls = 0;
      const { fetch } = mockFetch(() => {
        polls += 1;
        return jsonResponse({
          id: "ix-1",
          status: polls < 3 ? "building" : "ready",
          error: null,
        });
      });
      const api = new ApiClient("http://host", fetch);
      const pending = api.pollUntilReady("ix-1", { intervalMs: 10 });
      await vi.advanceTimersByTimeAsync(50);
      const handle = await pending;
      expect(handle.status).toBe("ready");
      expect(polls).toBe(3);
    } finally {
      vi.useRealTimers();
    }
  });

  it("raises when the build ends in error", async () => {
    const { fetch } = mockFetch(() =>
      jsonResponse({ id: "ix-1", status: "error", error: "boom" }));
    const api = new ApiClient("http://host", fetch);
    await expect(api.pollUntilReady("ix-1")).rejects.toThrow("boom");
  });

  it("addresses every route the service exposes", async () => {
    const { fetch, calls } = mockFetch(() => jsonResponse({}));
    const api = new ApiClient("http://host", fetch);
    await api.createGeneratedDataset(10, 64, 1);
    await api.getDataset("ds-1");
    await api.createIndex({ kind: "clsm", strategy: "BTP" });
    await api.getIndex("ix-1");
    await api.getStats("ix-1");
    await api.ingest("ix-1", [{ values: [1, 2] }]);
    await api.query("ix-1", [1, 2], "exact");
    await api.getTrace("ix-1:q000001");
    await api.recommend({
      mode: "streaming",
      dataset_bytes: 1,
      memory_budget_bytes: 1,
      expected_query_count: 1,
    });
    expect(calls.map((c) => c.url)).toEqual([
      "http://host/datasets",
      "http://host/datasets/ds-1",
      "http://host/indexes",
      "http://host/indexes/ix-1",
      "http://host/indexes/ix-1/stats",
      "http://host/indexes/ix-1/ingest",
      "http://host/indexes/ix-1/query",
      "http://host/traces/ix-1:q000001",
      "http://host/recommend",
    ]);
  });
});

describe("data-layer purity", () => {
  it("computes no distances or index math client side", async () => {
    const fs = await import("node:fs/promises");
    const url = new URL("../src/api.ts", import.meta.url);
    const source = await fs.readFile(url, "utf-8");
    // every displayed number must originate from a response body
    for (const token of ["Math.sqrt", "Math.pow", "Math.hypot", "reduce("]) {
      expect(source).not.toContain(token);
    }
  });
});
