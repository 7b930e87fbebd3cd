/**
 * Plot geometry: affine mappings between data coordinates and SVG pixels,
 * plus small path helpers.  Pure presentation — nothing in here touches the
 * mathematics of the payloads being drawn.
 */

export interface LinearScale {
  (value: number): number;
  readonly domain: [number, number];
  readonly range: [number, number];
  invert(pixel: number): number;
}

/** Affine map from a data interval onto a pixel interval. */
export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as {
    (value: number): number;
    domain: [number, number];
    range: [number, number];
    invert(pixel: number): number;
  };
  scale.domain = [d0, d1];
  scale.range = [r0, r1];
  scale.invert = (pixel: number) => d0 + ((pixel - r0) / (r1 - r0 || 1)) * span;
  return scale;
}

/** Round-tripped tick positions: about `count` round values inside the domain. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain[0] <= domain[1] ? domain : [domain[1], domain[0]];
  const span = hi - lo;
  if (!(span > 0) || !isFinite(span)) {
    return [lo];
  }
  const rawStep = span / Math.max(1, count);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((k) => k * power);
  const step = candidates.find((c) => span / c <= count) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/** SVG polyline path through the given pixel points. */
export function pathThrough(points: [number, number][]): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
    .join("");
}

/** Namespaced SVG element with attributes applied. */
export function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

/** Squared pixel distance between two points. */
export function dist2(ax: number, ay: number, bx: number, by: number): number {
  const dx = ax - bx;
  const dy = ay - by;
  return dx * dx + dy * dy;
}
