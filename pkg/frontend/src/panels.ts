/**
 * Result panels: branch list with gains, spectrum scatter, sensitivity
 * slider, and simulation trace.  Every function here turns a service
 * payload into DOM; none of them computes anything the service did not
 * already report.
 */

import type {
  ControlMidPayload,
  SensitivityPayload,
  SimulationPayload,
  SolutionPayload,
  SpectrumPayload,
} from "./api.js";
import { coeffList, sig, tickLabel } from "./format.js";
import { linearScale, pathThrough, svgElement, ticks } from "./scale.js";

const PLOT_WIDTH = 460;
const PLOT_HEIGHT = 300;
const MARGIN = { left: 52, right: 14, top: 14, bottom: 36 };

function plotFrame(): SVGSVGElement {
  return svgElement("svg", {
    width: PLOT_WIDTH,
    height: PLOT_HEIGHT,
    viewBox: `0 0 ${PLOT_WIDTH} ${PLOT_HEIGHT}`,
    class: "plot",
    role: "img",
  });
}

function axisGroup(
  sx: ReturnType<typeof linearScale>,
  sy: ReturnType<typeof linearScale>,
  xTitle: string,
  yTitle: string,
): SVGGElement {
  const g = svgElement("g", { class: "axes" });
  const y0 = PLOT_HEIGHT - MARGIN.bottom;
  for (const value of ticks(sx.domain, 5)) {
    const x = sx(value);
    g.append(svgElement("line", { x1: x, y1: y0, x2: x, y2: y0 + 5, class: "tick" }));
    const label = svgElement("text", {
      x,
      y: y0 + 17,
      "text-anchor": "middle",
      class: "tick-label",
    });
    label.textContent = tickLabel(value);
    g.append(label);
  }
  for (const value of ticks(sy.domain, 5)) {
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
  const xa = svgElement("text", {
    x: (MARGIN.left + PLOT_WIDTH - MARGIN.right) / 2,
    y: PLOT_HEIGHT - 4,
    "text-anchor": "middle",
    class: "axis-title",
  });
  xa.textContent = xTitle;
  const ya = svgElement("text", {
    transform: `translate(12 ${(MARGIN.top + PLOT_HEIGHT - MARGIN.bottom) / 2}) rotate(-90)`,
    "text-anchor": "middle",
    class: "axis-title",
  });
  ya.textContent = yTitle;
  g.append(xa, ya);
  return g;
}

// ------------------------------------------------------------ branch list

export interface BranchListCallbacks {
  onSelect(index: number): void;
}

/**
 * Table of placement branches.  The service orders solutions with the
 * default branch first (rightmost root when solving for s0, smallest
 * delay when solving for tau), so row 0 carries the default highlight
 * until the user picks another row.
 */
export function renderBranchList(
  container: HTMLElement,
  payload: ControlMidPayload | null,
  activeIndex: number,
  callbacks: BranchListCallbacks,
): void {
  container.replaceChildren();
  if (payload === null) {
    return;
  }
  if (payload.solutions.length === 0) {
    const none = document.createElement("p");
    none.className = "placeholder";
    none.textContent = "no admissible branches at this delay";
    container.append(none);
    return;
  }
  const table = document.createElement("table");
  table.className = "branch-list";
  const head = document.createElement("tr");
  for (const title of ["", "s0", "tau", "multiplicity", "condition"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.append(th);
  }
  table.append(head);
  payload.solutions.forEach((solution, index) => {
    const row = document.createElement("tr");
    row.className = index === activeIndex ? "branch active" : "branch";
    const star = document.createElement("td");
    star.textContent = index === 0 ? "default" : "";
    row.append(star);
    for (const value of [solution.s0, solution.tau, solution.multiplicity, solution.condition]) {
      const td = document.createElement("td");
      td.textContent = sig(value);
      row.append(td);
    }
    row.addEventListener("click", () => callbacks.onSelect(index));
    table.append(row);
  });
  container.append(table);
}

/** Designed coefficients and, when the plant came from the catalog, the
 * physical gain table the service attached to the branch. */
export function renderDesign(
  container: HTMLElement,
  solution: SolutionPayload | null,
): void {
  container.replaceChildren();
  if (solution === null) {
    return;
  }
  const coeffs = document.createElement("p");
  coeffs.className = "design-coeffs";
  coeffs.textContent =
    `b = [${coeffList(solution.b)}]   ` +
    `max residual ${sig(Math.max(...solution.residuals), 3)}`;
  container.append(coeffs);
  if (solution.gains === undefined) {
    return;
  }
  if (solution.gains === null) {
    const note = document.createElement("p");
    note.className = "gains-unavailable";
    note.textContent = "gains unavailable: delay below the physical minimum";
    container.append(note);
    return;
  }
  const table = document.createElement("table");
  table.className = "gains-table";
  for (const [name, value] of Object.entries(solution.gains)) {
    const row = document.createElement("tr");
    const key = document.createElement("td");
    key.textContent = name;
    const val = document.createElement("td");
    val.textContent = sig(value);
    row.append(key, val);
    table.append(row);
  }
  container.append(table);
}

// --------------------------------------------------------------- spectrum

/**
 * Root scatter with the spectral abscissa marked.  The dominant roots —
 * those whose real part equals the abscissa — get the emphasis class, and
 * a warning badge appears when the window's count failed certification.
 */
export function renderSpectrum(
  container: HTMLElement,
  payload: SpectrumPayload | null,
): void {
  container.replaceChildren();
  if (payload === null) {
    return;
  }
  if (!payload.certified) {
    const badge = document.createElement("span");
    badge.className = "badge warning";
    badge.textContent = "count not certified";
    container.append(badge);
  }
  const svg = plotFrame();
  const w = payload.window;
  const sx = linearScale([w.x_min, w.x_max], [MARGIN.left, PLOT_WIDTH - MARGIN.right]);
  const sy = linearScale([-w.y_max, w.y_max], [PLOT_HEIGHT - MARGIN.bottom, MARGIN.top]);
  svg.append(axisGroup(sx, sy, "Re s", "Im s"));
  if (payload.abscissa !== null) {
    svg.append(
      svgElement("line", {
        x1: sx(payload.abscissa),
        y1: MARGIN.top,
        x2: sx(payload.abscissa),
        y2: PLOT_HEIGHT - MARGIN.bottom,
        class: "abscissa-line",
      }),
    );
  }
  for (const root of payload.roots) {
    const dominant = payload.abscissa !== null && root.re === payload.abscissa;
    const marker = svgElement("circle", {
      cx: sx(root.re),
      cy: sy(root.im),
      r: dominant ? 6 : 4,
      class: dominant ? "root dominant" : "root",
    });
    const tip = svgElement("title");
    tip.textContent =
      `${sig(root.re)} ${root.im >= 0 ? "+" : "-"} ${sig(Math.abs(root.im))}i ` +
      `(multiplicity ${root.multiplicity})`;
    marker.append(tip);
    svg.append(marker);
  }
  container.append(svg);
  const summary = document.createElement("p");
  summary.className = "panel-summary";
  summary.textContent =
    `${payload.total_count} roots in window, abscissa ${sig(payload.abscissa)}` +
    (payload.certified ? ` (certified count ${payload.certified_count})` : "");
  container.append(summary);
}

// ------------------------------------------------------------ sensitivity

export interface SensitivityView {
  /** Move the markers to the sweep sample with this index. */
  showStep(index: number): void;
}

/**
 * Delay-perturbation view: a slider whose positions are exactly the sweep
 * grid the service evaluated, and one marker per root branch.  At the
 * nominal delay (the grid midpoint) the branches coincide at the placed
 * root; dragging the slider animates how they split.
 */
export function renderSensitivity(
  container: HTMLElement,
  payload: SensitivityPayload | null,
): SensitivityView | null {
  container.replaceChildren();
  if (payload === null) {
    return null;
  }
  const svg = plotFrame();
  const allRe = payload.branches.flatMap((branch) => branch.re).filter(isFinite);
  const allIm = payload.branches.flatMap((branch) => branch.im).filter(isFinite);
  const reLo = Math.min(...allRe, payload.s0) - 0.05;
  const reHi = Math.max(...allRe, payload.s0) + 0.05;
  const imSpan = Math.max(0.05, ...allIm.map((v) => Math.abs(v)));
  const sx = linearScale([reLo, reHi], [MARGIN.left, PLOT_WIDTH - MARGIN.right]);
  const sy = linearScale([-imSpan, imSpan], [PLOT_HEIGHT - MARGIN.bottom, MARGIN.top]);
  svg.append(axisGroup(sx, sy, "Re s", "Im s"));

  for (const branch of payload.branches) {
    const pts: [number, number][] = [];
    branch.re.forEach((re, i) => {
      if (isFinite(re) && isFinite(branch.im[i])) {
        pts.push([sx(re), sy(branch.im[i])]);
      }
    });
    svg.append(
      svgElement("path", { d: pathThrough(pts), class: "branch-trace", fill: "none" }),
    );
  }

  const markers = payload.branches.map(() =>
    svgElement("circle", { r: 5, class: "branch-marker" }),
  );
  markers.forEach((marker) => svg.append(marker));

  const placed = svgElement("circle", {
    cx: sx(payload.s0),
    cy: sy(0),
    r: 7,
    class: "placed-root",
    fill: "none",
  });
  svg.append(placed);
  container.append(svg);

  const controls = document.createElement("div");
  controls.className = "slider-row";
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = String(payload.taus.length - 1);
  slider.step = "1";
  slider.className = "tau-slider";
  const readout = document.createElement("span");
  readout.className = "tau-readout";
  controls.append(slider, readout);
  container.append(controls);

  const nominalIndex = (() => {
    const exact = payload.taus.indexOf(payload.base_tau);
    return exact >= 0 ? exact : Math.floor(payload.taus.length / 2);
  })();

  function showStep(index: number): void {
    if (payload === null) {
      return;
    }
    const clamped = Math.max(0, Math.min(payload.taus.length - 1, Math.round(index)));
    slider.value = String(clamped);
    const tau = payload.taus[clamped];
    readout.textContent =
      `tau = ${sig(tau)}` + (clamped === nominalIndex ? " (nominal)" : "");
    payload.branches.forEach((branch, j) => {
      const re = branch.re[clamped];
      const im = branch.im[clamped];
      const marker = markers[j];
      if (isFinite(re) && isFinite(im)) {
        marker.setAttribute("cx", String(sx(re)));
        marker.setAttribute("cy", String(sy(im)));
        marker.setAttribute(
          "class",
          branch.converged[clamped] ? "branch-marker" : "branch-marker unconverged",
        );
      } else {
        marker.setAttribute("class", "branch-marker hidden");
      }
    });
  }

  slider.addEventListener("input", () => showStep(Number(slider.value)));
  showStep(nominalIndex);
  return { showStep };
}

// -------------------------------------------------------------- simulation

/**
 * Closed-loop trajectory with the service's fitted decay overlaid.  The
 * envelope uses the reported rate, anchored for display at the window
 * start on the trajectory's own amplitude there.
 */
export function renderSimulation(
  container: HTMLElement,
  payload: SimulationPayload | null,
  fitWindow: [number, number] | null,
): void {
  container.replaceChildren();
  if (payload === null) {
    return;
  }
  const svg = plotFrame();
  const tHi = payload.t[payload.t.length - 1] ?? 1;
  const yAbs = Math.max(1e-12, ...payload.y.map((v) => Math.abs(v)));
  const sx = linearScale([0, tHi], [MARGIN.left, PLOT_WIDTH - MARGIN.right]);
  const sy = linearScale([-yAbs, yAbs], [PLOT_HEIGHT - MARGIN.bottom, MARGIN.top]);
  svg.append(axisGroup(sx, sy, "t", "y(t)"));

  const stride = Math.max(1, Math.floor(payload.t.length / 2000));
  const pts: [number, number][] = [];
  for (let i = 0; i < payload.t.length; i += stride) {
    pts.push([sx(payload.t[i]), sy(payload.y[i])]);
  }
  svg.append(svgElement("path", { d: pathThrough(pts), class: "trace", fill: "none" }));

  if (payload.decay_estimate !== null && fitWindow !== null) {
    const [t0, t1] = fitWindow;
    const start = payload.t.findIndex((t) => t >= t0);
    if (start >= 0) {
      let anchor = Math.abs(payload.y[start]);
      for (let i = start; i < payload.t.length && payload.t[i] <= t1; i++) {
        anchor = Math.max(anchor, Math.abs(payload.y[i]));
      }
      const rate = payload.decay_estimate;
      const envelope: [number, number][] = [];
      for (let i = start; i < payload.t.length && payload.t[i] <= t1; i += stride) {
        const value = anchor * Math.exp(rate * (payload.t[i] - payload.t[start]));
        envelope.push([sx(payload.t[i]), sy(value)]);
      }
      svg.append(
        svgElement("path", { d: pathThrough(envelope), class: "decay-line", fill: "none" }),
      );
    }
  }
  container.append(svg);

  const summary = document.createElement("p");
  summary.className = "panel-summary";
  summary.textContent =
    payload.decay_estimate === null
      ? "decay estimate unavailable for this window"
      : `fitted decay rate ${sig(payload.decay_estimate)}`;
  container.append(summary);
}
