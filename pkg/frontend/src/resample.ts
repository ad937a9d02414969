/**
 * Resample a freehand polyline into exactly n evenly spaced values by linear
 * interpolation, so a drawing of any point count becomes a valid query series.
 */

export interface Point {
  x: number;
  y: number;
}

/**
 * Linear interpolation over the stroke's captured points: target position i
 * maps to parameter t = i * (m - 1) / (n - 1) along the m captured samples.
 * A single captured point yields a constant series.
 */
export function resampleValues(samples: number[], n: number): number[] {
  if (n <= 0) throw new Error("target length must be positive");
  if (samples.length === 0) throw new Error("nothing drawn");
  const m = samples.length;
  if (m === 1) return new Array<number>(n).fill(samples[0]!);
  if (n === 1) return [samples[0]!];
  const out = new Array<number>(n);
  const scale = (m - 1) / (n - 1);
  for (let i = 0; i < n; i++) {
    const t = i * scale;
    const lo = Math.min(Math.floor(t), m - 2);
    const frac = t - lo;
    out[i] = samples[lo]! * (1 - frac) + samples[lo + 1]! * frac;
  }
  return out;
}

/**
 * Turn canvas stroke points into series values: y grows downward on a canvas,
 * so values are flipped around the vertical center (pixel units; the server
 * z-normalizes every query anyway).
 */
export function strokeToValues(points: Point[], canvasHeight: number, n: number): number[] {
  const ys = points.map((p) => canvasHeight - p.y);
  return resampleValues(ys, n);
}
