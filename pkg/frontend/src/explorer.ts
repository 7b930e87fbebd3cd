/**
 * Admissibility explorer: sign map of the feasibility criterion over the
 * (s0, tau) rectangle, overlaid with the zero curves along which designs
 * exist.  The pointer snaps to the nearest curve vertex within a small
 * pixel radius; clicking a snapped point reports it as the candidate
 * design, clicking anywhere else reports a miss so the app can show a
 * hint instead of firing a request.
 */

import type { AdmissibilityPayload } from "./api.js";
import type { Selection } from "./state.js";
import { linearScale, LinearScale, pathThrough, svgElement, dist2, ticks } from "./scale.js";
import { tickLabel } from "./format.js";

/** Pixel radius inside which the pointer snaps to a curve vertex. */
export const SNAP_RADIUS = 8;

export const VIEW_WIDTH = 640;
export const VIEW_HEIGHT = 420;
const MARGIN = { left: 52, right: 14, top: 12, bottom: 40 };

export interface ExplorerCallbacks {
  /** A curve vertex was clicked (already snapped). */
  onPick(point: Selection): void;
  /** A click landed further than the snap radius from every curve. */
  onMiss(): void;
}

interface Snapped {
  point: Selection;
  px: number;
  py: number;
}

export interface Explorer {
  readonly element: SVGSVGElement;
  render(grid: AdmissibilityPayload | null, selected: Selection | null): void;
  /** Pixel position of a data point under the current scales. */
  toPixel(point: Selection): [number, number] | null;
  /** Nearest curve vertex within the snap radius of a pixel position. */
  snap(px: number, py: number): Snapped | null;
}

export function createExplorer(callbacks: ExplorerCallbacks): Explorer {
  const svg = svgElement("svg", {
    width: VIEW_WIDTH,
    height: VIEW_HEIGHT,
    viewBox: `0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}`,
    class: "explorer",
    role: "img",
  });

  let grid: AdmissibilityPayload | null = null;
  let selected: Selection | null = null;
  let sx: LinearScale | null = null;
  let sy: LinearScale | null = null;
  let hover: SVGCircleElement | null = null;

  function toPixel(point: Selection): [number, number] | null {
    if (sx === null || sy === null) {
      return null;
    }
    return [sx(point.s0), sy(point.tau)];
  }

  function snap(px: number, py: number): Snapped | null {
    if (grid === null || sx === null || sy === null) {
      return null;
    }
    let best: Snapped | null = null;
    let bestD2 = SNAP_RADIUS * SNAP_RADIUS;
    for (const curve of grid.curves) {
      for (const [s0, tau] of curve) {
        const cx = sx(s0);
        const cy = sy(tau);
        const d2 = dist2(px, py, cx, cy);
        if (d2 <= bestD2) {
          bestD2 = d2;
          best = { point: { s0, tau }, px: cx, py: cy };
        }
      }
    }
    return best;
  }

  /** Event position in SVG coordinates; identity when layout is absent. */
  function eventPixel(event: MouseEvent): [number, number] {
    const rect = svg.getBoundingClientRect();
    const scaleX = rect.width > 0 ? VIEW_WIDTH / rect.width : 1;
    const scaleY = rect.height > 0 ? VIEW_HEIGHT / rect.height : 1;
    return [(event.clientX - rect.left) * scaleX, (event.clientY - rect.top) * scaleY];
  }

  svg.addEventListener("mousemove", (event) => {
    const [px, py] = eventPixel(event);
    const hit = snap(px, py);
    if (hover !== null) {
      hover.remove();
      hover = null;
    }
    if (hit !== null) {
      hover = svgElement("circle", {
        cx: hit.px,
        cy: hit.py,
        r: 5,
        class: "explorer-hover",
      });
      svg.append(hover);
    }
    svg.style.cursor = hit !== null ? "pointer" : "default";
  });

  svg.addEventListener("mouseleave", () => {
    if (hover !== null) {
      hover.remove();
      hover = null;
    }
  });

  svg.addEventListener("click", (event) => {
    const [px, py] = eventPixel(event);
    const hit = snap(px, py);
    if (hit === null) {
      callbacks.onMiss();
    } else {
      callbacks.onPick(hit.point);
    }
  });

  function render(next: AdmissibilityPayload | null, nextSelected: Selection | null): void {
    grid = next;
    selected = nextSelected;
    hover = null;
    svg.replaceChildren();
    if (grid === null) {
      const empty = svgElement("text", {
        x: VIEW_WIDTH / 2,
        y: VIEW_HEIGHT / 2,
        "text-anchor": "middle",
        class: "placeholder",
      });
      empty.textContent = "map admissible designs to begin";
      svg.append(empty);
      sx = null;
      sy = null;
      return;
    }

    const s0v = grid.s0_values;
    const tauv = grid.tau_values;
    sx = linearScale(
      [s0v[0], s0v[s0v.length - 1]],
      [MARGIN.left, VIEW_WIDTH - MARGIN.right],
    );
    sy = linearScale(
      [0, tauv[tauv.length - 1]],
      [VIEW_HEIGHT - MARGIN.bottom, MARGIN.top],
    );

    svg.append(signCells(grid, sx, sy));
    for (const curve of grid.curves) {
      const path = svgElement("path", {
        d: pathThrough(curve.map(([s0, tau]) => [sx!(s0), sy!(tau)])),
        class: "zero-curve",
        fill: "none",
      });
      svg.append(path);
    }
    svg.append(axes(sx, sy));
    if (selected !== null) {
      const [px, py] = [sx(selected.s0), sy(selected.tau)];
      svg.append(
        svgElement("circle", { cx: px, cy: py, r: 6, class: "explorer-selected" }),
      );
    }
  }

  render(null, null);
  return { element: svg, render, toPixel, snap };
}

/**
 * Sign map as run-length-merged cells: consecutive same-sign samples along
 * tau collapse into one rectangle, keeping the node count small.
 */
function signCells(
  grid: AdmissibilityPayload,
  sx: LinearScale,
  sy: LinearScale,
): SVGGElement {
  const g = svgElement("g", { class: "sign-cells" });
  const s0v = grid.s0_values;
  const tauv = grid.tau_values;
  for (let i = 0; i < s0v.length; i++) {
    const x0 = edge(s0v, i, sx, false);
    const x1 = edge(s0v, i + 1, sx, false);
    let j = 0;
    while (j < tauv.length) {
      const sign = grid.values[i][j] >= 0;
      let k = j;
      while (k + 1 < tauv.length && (grid.values[i][k + 1] >= 0) === sign) {
        k++;
      }
      const y0 = edge(tauv, j, sy, true);
      const y1 = edge(tauv, k + 1, sy, true);
      g.append(
        svgElement("rect", {
          x: Math.min(x0, x1),
          y: Math.min(y0, y1),
          width: Math.abs(x1 - x0),
          height: Math.abs(y1 - y0),
          class: sign ? "cell-positive" : "cell-negative",
        }),
      );
      j = k + 1;
    }
  }
  return g;
}

/** Pixel boundary between sample index-1 and index along an axis. */
function edge(values: number[], index: number, scale: LinearScale, isTau: boolean): number {
  if (index <= 0) {
    return scale(isTau ? 0 : values[0]);
  }
  if (index >= values.length) {
    return scale(values[values.length - 1]);
  }
  return scale((values[index - 1] + values[index]) / 2);
}

function axes(sx: LinearScale, sy: LinearScale): SVGGElement {
  const g = svgElement("g", { class: "axes" });
  const yPixel = VIEW_HEIGHT - MARGIN.bottom;
  for (const value of ticks(sx.domain, 6)) {
    const x = sx(value);
    g.append(svgElement("line", { x1: x, y1: yPixel, x2: x, y2: yPixel + 5, class: "tick" }));
    const label = svgElement("text", {
      x,
      y: yPixel + 18,
      "text-anchor": "middle",
      class: "tick-label",
    });
    label.textContent = tickLabel(value);
    g.append(label);
  }
  for (const value of ticks(sy.domain, 6)) {
    const y = sy(value);
    g.append(
      svgElement("line", { x1: MARGIN.left - 5, y1: y, x2: MARGIN.left, y2: y, class: "tick" }),
    );
    const label = svgElement("text", {
      x: MARGIN.left - 8,
      y: y + 4,
      "text-anchor": "end",
      class: "tick-label",
    });
    label.textContent = tickLabel(value);
    g.append(label);
  }
  const xTitle = svgElement("text", {
    x: (MARGIN.left + VIEW_WIDTH - MARGIN.right) / 2,
    y: VIEW_HEIGHT - 6,
    "text-anchor": "middle",
    class: "axis-title",
  });
  xTitle.textContent = "target root s0";
  const yTitle = svgElement("text", {
    x: 0,
    y: 0,
    transform: `translate(12 ${(MARGIN.top + VIEW_HEIGHT - MARGIN.bottom) / 2}) rotate(-90)`,
    "text-anchor": "middle",
    class: "axis-title",
  });
  yTitle.textContent = "delay tau";
  g.append(xTitle, yTitle);
  return g;
}
