/**
 * Minimal canvas renderers: series overlays for query/result pairs and a
 * stepped line for streaming metrics. Pure drawing; the numbers plotted come
 * straight from API responses.
 */

import type { MetricPoint } from "./session.js";

export interface SeriesStyle {
  color: string;
  width?: number;
}

function extent(valuesList: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const values of valuesList) {
    for (const v of values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

export function drawSeriesOverlay(
  canvas: HTMLCanvasElement,
  series: { values: number[]; style: SeriesStyle; label: string }[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [lo, hi] = extent(series.map((s) => s.values));
  const pad = 8;
  const plotW = canvas.width - 2 * pad;
  const plotH = canvas.height - 2 * pad;
  series.forEach((s, idx) => {
    if (s.values.length === 0) return;
    ctx.strokeStyle = s.style.color;
    ctx.lineWidth = s.style.width ?? 1.5;
    ctx.beginPath();
    s.values.forEach((v, i) => {
      const x = pad + (plotW * i) / Math.max(1, s.values.length - 1);
      const y = pad + plotH * (1 - (v - lo) / (hi - lo));
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = s.style.color;
    ctx.font = "11px sans-serif";
    ctx.fillText(s.label, pad + 4, pad + 12 * (idx + 1));
  });
}

export function drawMetricChart(
  canvas: HTMLCanvasElement,
  points: MetricPoint[],
  pick: (p: MetricPoint) => number,
  color: string,
  label: string,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#888";
  ctx.font = "11px sans-serif";
  ctx.fillText(label, 8, 14);
  if (points.length === 0) return;
  const values = points.map(pick);
  const hi = Math.max(...values, 1);
  const pad = 8;
  const plotW = canvas.width - 2 * pad;
  const plotH = canvas.height - 24;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  values.forEach((v, i) => {
    const x = pad + (plotW * i) / Math.max(1, values.length - 1);
    const y = 18 + plotH * (1 - v / hi);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  const last = values[values.length - 1]!;
  ctx.fillStyle = color;
  ctx.fillText(String(last), canvas.width - 70, 14);
}
