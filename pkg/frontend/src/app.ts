/**
 * Composition root: builds the cockpit layout, wires the panels to the
 * session store, and orchestrates service requests.
 *
 * Flow: the user enters a plant (catalog example with physical parameters,
 * or raw coefficients) and maps its admissibility rectangle; clicking a
 * zero-curve point requests the placement branches at that delay; picking
 * a branch fans out to the spectrum, sensitivity, and simulation panels;
 * ticked panels can then leave as one report.  Every number on screen is
 * read from a service payload — the client never re-derives coefficients,
 * roots, or gains on its own.
 */

import {
  AdmissibilityRequest,
  ApiError,
  ApiErrorBody,
  Client,
  ControlMidRequest,
  ExamplesPayload,
  isAbort,
  SolutionPayload,
} from "./api.js";
import { createExplorer, Explorer } from "./explorer.js";
import { parseNumberList } from "./format.js";
import {
  renderBranchList,
  renderDesign,
  renderSensitivity,
  renderSimulation,
  renderSpectrum,
} from "./panels.js";
import { blobDownload, DownloadSink, exportReport } from "./report.js";
import {
  editSystem,
  exportableModes,
  PanelState,
  ReportMode,
  select,
  Selection,
  SessionState,
  Store,
  toggleReportMode,
} from "./state.js";

/** Sample counts for the explorer grid request. */
export const EXPLORER_GRID = { ns0: 96, ntau: 96 };

/** Sweep request shape fanned out for a chosen branch. */
export const SENSITIVITY_SPAN = 0.2;
export const SENSITIVITY_STEPS = 21;
export const SIMULATION_T = 30;
export const SIMULATION_H = 0.01;
export const SIMULATION_FIT_WINDOW: [number, number] = [10, 25];
export const SPECTRUM_LEFT_MARGIN = 3;
export const SPECTRUM_RIGHT_EDGE = 0.5;
export const SPECTRUM_HALF_HEIGHT = 8;

const REPORT_MODES: ReportMode[] = [
  "ControlMID",
  "Admissibility",
  "Spectrum",
  "Sensitivity",
  "Simulation",
];

const REPORT_TITLE = "Delay feedback design report";

export interface AppOptions {
  client?: Client;
  download?: DownloadSink;
}

export interface AppHandles {
  store: Store;
  client: Client;
  explorer: Explorer;
  root: HTMLElement;
}

interface PanelDom {
  section: HTMLElement;
  badge: HTMLElement;
  spinner: HTMLElement;
  banner: HTMLElement;
  body: HTMLElement;
}

export function initApp(root: HTMLElement, options: AppOptions = {}): AppHandles {
  const client = options.client ?? new Client();
  const download = options.download ?? blobDownload;
  const store = new Store();
  let healthOk = false;
  let examplesInfo: ExamplesPayload | null = null;

  root.replaceChildren();
  root.className = "app";

  // ------------------------------------------------------------- header
  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "delay feedback designer";
  const health = document.createElement("span");
  health.id = "health";
  health.className = "health pending";
  health.textContent = "checking service…";
  header.append(title, health);
  root.append(header);

  // ------------------------------------------------------- system input
  const systemPanel = document.createElement("section");
  systemPanel.id = "system-panel";
  systemPanel.className = "panel";
  const systemTitle = document.createElement("h2");
  systemTitle.textContent = "plant";
  systemPanel.append(systemTitle);

  const kindRow = document.createElement("div");
  kindRow.className = "field-row";
  const kindSelect = document.createElement("select");
  kindSelect.id = "input-kind";
  for (const [value, label] of [
    ["example", "catalog example"],
    ["raw", "raw coefficients"],
  ]) {
    const opt = document.createElement("option");
    opt.value = value;
    opt.textContent = label;
    kindSelect.append(opt);
  }
  kindRow.append(labelled("input", kindSelect));
  systemPanel.append(kindRow);

  const exampleRow = document.createElement("div");
  exampleRow.className = "field-row";
  const exampleSelect = document.createElement("select");
  exampleSelect.id = "example-select";
  exampleRow.append(labelled("example", exampleSelect));
  const paramFields = document.createElement("div");
  paramFields.id = "param-fields";
  paramFields.className = "param-fields";
  exampleRow.append(paramFields);
  systemPanel.append(exampleRow);

  const rawRow = document.createElement("div");
  rawRow.className = "field-row hidden";
  const rawA = document.createElement("input");
  rawA.id = "raw-a";
  rawA.value = "1, 0";
  const rawM = document.createElement("input");
  rawM.id = "raw-m";
  rawM.type = "number";
  rawM.min = "0";
  rawM.value = "1";
  rawRow.append(labelled("a (low to high)", rawA), labelled("m", rawM));
  systemPanel.append(rawRow);

  const rangeRow = document.createElement("div");
  rangeRow.className = "field-row";
  const s0MinInput = document.createElement("input");
  s0MinInput.id = "s0-min";
  s0MinInput.type = "number";
  s0MinInput.value = "-3";
  const tauMaxInput = document.createElement("input");
  tauMaxInput.id = "tau-max";
  tauMaxInput.type = "number";
  tauMaxInput.value = "2";
  tauMaxInput.step = "0.1";
  const mapButton = document.createElement("button");
  mapButton.id = "map-button";
  mapButton.textContent = "map admissible designs";
  rangeRow.append(labelled("s0 min", s0MinInput), labelled("tau max", tauMaxInput), mapButton);
  systemPanel.append(rangeRow);
  root.append(systemPanel);

  // ------------------------------------------------------------- panels
  const explorerDom = panelDom(root, "explorer-panel", "admissibility");
  const explorer = createExplorer({
    onPick: (point) => void pickPoint(point),
    onMiss: () => {
      hint.textContent = "no zero curve within reach — click a point on a curve";
    },
  });
  const hint = document.createElement("p");
  hint.id = "explorer-hint";
  hint.className = "hint";
  explorerDom.body.append(explorer.element, hint);

  const designDom = panelDom(root, "design-panel", "design branches");
  const branchList = document.createElement("div");
  branchList.id = "branch-list";
  const designDetail = document.createElement("div");
  designDetail.id = "design-detail";
  designDom.body.append(branchList, designDetail);

  const spectrumDom = panelDom(root, "spectrum-panel", "spectrum");
  const sensitivityDom = panelDom(root, "sensitivity-panel", "delay sensitivity");
  const simulationDom = panelDom(root, "simulation-panel", "simulation");

  // ------------------------------------------------------------- report
  const reportPanel = document.createElement("section");
  reportPanel.id = "report-panel";
  reportPanel.className = "panel";
  const reportTitle = document.createElement("h2");
  reportTitle.textContent = "report";
  reportPanel.append(reportTitle);
  const reportBanner = document.createElement("div");
  reportBanner.className = "banner-area";
  reportPanel.append(reportBanner);
  const checkboxRow = document.createElement("div");
  checkboxRow.className = "report-checkboxes";
  const checkboxes = new Map<ReportMode, HTMLInputElement>();
  for (const mode of REPORT_MODES) {
    const wrap = document.createElement("label");
    wrap.className = "report-choice";
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.mode = mode;
    box.addEventListener("change", () => {
      if (!toggleReportMode(store, mode)) {
        box.checked = false;
      }
    });
    wrap.append(box, document.createTextNode(mode));
    checkboxRow.append(wrap);
    checkboxes.set(mode, box);
  }
  reportPanel.append(checkboxRow);
  const exportRow = document.createElement("div");
  exportRow.className = "field-row";
  const exportJson = document.createElement("button");
  exportJson.id = "export-json";
  exportJson.textContent = "export JSON";
  const exportHtml = document.createElement("button");
  exportHtml.id = "export-html";
  exportHtml.textContent = "export HTML";
  exportRow.append(exportJson, exportHtml);
  const pdfNote = document.createElement("p");
  pdfNote.className = "pdf-note";
  pdfNote.textContent =
    "for PDF: export HTML, open it, and print to PDF from the browser";
  reportPanel.append(exportRow, pdfNote);
  root.append(reportPanel);

  // ------------------------------------------------------ request logic

  function systemRequestBody(): AdmissibilityRequest | null {
    const system = store.get().system;
    if (system.kind === "example") {
      const body: AdmissibilityRequest = {
        example: system.exampleId,
        s0_min: system.s0Min,
        tau_max: system.tauMax,
        ns0: EXPLORER_GRID.ns0,
        ntau: EXPLORER_GRID.ntau,
      };
      if (Object.keys(system.params).length > 0) {
        body.params = { ...system.params };
      }
      return body;
    }
    if (system.rawA.length === 0) {
      return null;
    }
    return {
      a: [...system.rawA],
      m: system.rawM,
      s0_min: system.s0Min,
      tau_max: system.tauMax,
      ns0: EXPLORER_GRID.ns0,
      ntau: EXPLORER_GRID.ntau,
    };
  }

  function placementRequestBody(point: Selection): ControlMidRequest {
    const system = store.get().system;
    const body: ControlMidRequest = { tau: point.tau, branch: "all" };
    if (system.kind === "example") {
      body.example = system.exampleId;
      if (Object.keys(system.params).length > 0) {
        body.params = { ...system.params };
      }
    } else {
      body.a = [...system.rawA];
      body.m = system.rawM;
    }
    return body;
  }

  async function mapAdmissibility(): Promise<void> {
    const body = systemRequestBody();
    if (body === null) {
      store.update((s) => {
        s.admissibility.error = {
          code: "validation_error",
          message: "enter coefficients as a comma-separated list",
        };
      });
      return;
    }
    store.update((s) => {
      s.admissibility.pending = true;
      s.admissibility.error = null;
    });
    try {
      const payload = await client.admissibility(body);
      store.update((s) => {
        s.admissibility = { payload, stale: false, pending: false, error: null };
      });
    } catch (err) {
      failPanel("admissibility", err);
    }
  }

  async function pickPoint(point: Selection): Promise<void> {
    if (!select(store, point)) {
      return;
    }
    hint.textContent = "";
    store.update((s) => {
      s.placement.pending = true;
      s.placement.error = null;
    });
    try {
      const payload = await client.controlMid(placementRequestBody(point));
      store.update((s) => {
        s.placement = { payload, stale: false, pending: false, error: null };
        s.branchIndex = 0;
      });
      await fanOut();
    } catch (err) {
      failPanel("placement", err);
    }
  }

  /** Request spectrum, sensitivity, and simulation for the active branch. */
  async function fanOut(): Promise<void> {
    const solution = activeSolution(store.get());
    if (solution === null) {
      return;
    }
    store.update((s) => {
      for (const key of ["spectrum", "sensitivity", "simulation"] as const) {
        s[key].pending = true;
        s[key].error = null;
      }
    });
    await Promise.all([
      client
        .spectrum({
          qp: solution.qp,
          window: {
            x_min: solution.s0 - SPECTRUM_LEFT_MARGIN,
            x_max: SPECTRUM_RIGHT_EDGE,
            y_max: SPECTRUM_HALF_HEIGHT,
          },
        })
        .then(
          (payload) =>
            store.update((s) => {
              s.spectrum = { payload, stale: false, pending: false, error: null };
            }),
          (err) => failPanel("spectrum", err),
        ),
      client
        .sensitivity({
          qp: solution.qp,
          s0: solution.s0,
          span: SENSITIVITY_SPAN,
          steps: SENSITIVITY_STEPS,
        })
        .then(
          (payload) =>
            store.update((s) => {
              s.sensitivity = { payload, stale: false, pending: false, error: null };
            }),
          (err) => failPanel("sensitivity", err),
        ),
      client
        .simulate({
          qp: solution.qp,
          history: { kind: "constant", data: [1] },
          T: SIMULATION_T,
          h: SIMULATION_H,
          window: SIMULATION_FIT_WINDOW,
        })
        .then(
          (payload) =>
            store.update((s) => {
              s.simulation = { payload, stale: false, pending: false, error: null };
            }),
          (err) => failPanel("simulation", err),
        ),
    ]);
  }

  function failPanel(
    key: "admissibility" | "placement" | "spectrum" | "sensitivity" | "simulation",
    err: unknown,
  ): void {
    if (isAbort(err)) {
      return; // superseded by a newer request for the same panel
    }
    const body: ApiErrorBody =
      err instanceof ApiError
        ? { code: err.code, message: err.message, detail: err.detail }
        : { code: "client_error", message: String(err) };
    store.update((s) => {
      s[key].pending = false;
      s[key].error = body;
    });
  }

  // ------------------------------------------------------- input wiring

  kindSelect.addEventListener("change", () => {
    editSystem(store, { kind: kindSelect.value as "example" | "raw" });
  });
  exampleSelect.addEventListener("change", () => {
    editSystem(store, { exampleId: exampleSelect.value, params: {} });
  });
  rawA.addEventListener("change", () => {
    const parsed = parseNumberList(rawA.value);
    if (parsed !== null) {
      editSystem(store, { rawA: parsed });
    }
  });
  rawM.addEventListener("change", () => {
    editSystem(store, { rawM: Number(rawM.value) });
  });
  s0MinInput.addEventListener("change", () => {
    editSystem(store, { s0Min: Number(s0MinInput.value) });
  });
  tauMaxInput.addEventListener("change", () => {
    editSystem(store, { tauMax: Number(tauMaxInput.value) });
  });
  mapButton.addEventListener("click", () => void mapAdmissibility());
  exportJson.addEventListener("click", () => void runExport("json"));
  exportHtml.addEventListener("click", () => void runExport("html"));

  async function runExport(format: "json" | "html"): Promise<void> {
    reportBanner.replaceChildren();
    try {
      await exportReport(client, store.get(), format, REPORT_TITLE, download);
    } catch (err) {
      if (isAbort(err)) {
        return;
      }
      const body: ApiErrorBody =
        err instanceof ApiError
          ? { code: err.code, message: err.message }
          : { code: "client_error", message: String(err) };
      reportBanner.append(bannerElement(body, () => reportBanner.replaceChildren()));
    }
  }

  function rebuildParamFields(): void {
    paramFields.replaceChildren();
    const state = store.get();
    if (examplesInfo === null || state.system.kind !== "example") {
      return;
    }
    const info = examplesInfo[state.system.exampleId];
    if (info === undefined) {
      return;
    }
    for (const [name, meta] of Object.entries(info.params)) {
      const input = document.createElement("input");
      input.type = "number";
      input.dataset.param = name;
      input.value = String(state.system.params[name] ?? meta.default);
      input.title = `${meta.meaning}${meta.unit ? ` [${meta.unit}]` : ""}`;
      input.addEventListener("change", () => {
        const value = Number(input.value);
        if (isFinite(value)) {
          const params = { ...store.get().system.params };
          if (value === meta.default) {
            delete params[name];
          } else {
            params[name] = value;
          }
          editSystem(store, { params });
        }
      });
      paramFields.append(labelled(name, input));
    }
  }

  // ---------------------------------------------------------- rendering

  let lastSpectrum: unknown = Symbol("unrendered");
  let lastSensitivity: unknown = Symbol("unrendered");
  let lastSimulation: unknown = Symbol("unrendered");
  let lastPlacement: unknown = Symbol("unrendered");
  let lastBranch = -1;
  let lastGrid: unknown = Symbol("unrendered");
  let lastSelected: Selection | null = null;
  let lastGridStale = false;

  function render(state: SessionState): void {
    exampleRow.classList.toggle("hidden", state.system.kind !== "example");
    rawRow.classList.toggle("hidden", state.system.kind !== "raw");

    renderPanelChrome(explorerDom, state.admissibility, healthOk, () =>
      store.update((s) => {
        s.admissibility.error = null;
      }),
    );
    if (
      state.admissibility.payload !== lastGrid ||
      state.selected !== lastSelected ||
      state.admissibility.stale !== lastGridStale
    ) {
      lastGrid = state.admissibility.payload;
      lastSelected = state.selected;
      lastGridStale = state.admissibility.stale;
      explorer.render(
        state.admissibility.stale ? null : state.admissibility.payload,
        state.selected,
      );
      if (state.admissibility.stale) {
        hint.textContent = "inputs changed — map again to refresh";
      }
    }

    renderPanelChrome(designDom, state.placement, healthOk, () =>
      store.update((s) => {
        s.placement.error = null;
      }),
    );
    if (state.placement.payload !== lastPlacement || state.branchIndex !== lastBranch) {
      lastPlacement = state.placement.payload;
      lastBranch = state.branchIndex;
      renderBranchList(branchList, state.placement.payload, state.branchIndex, {
        onSelect: (index) => {
          store.update((s) => {
            s.branchIndex = index;
          });
          void fanOut();
        },
      });
      renderDesign(designDetail, activeSolution(state));
    }

    renderPanelChrome(spectrumDom, state.spectrum, healthOk, () =>
      store.update((s) => {
        s.spectrum.error = null;
      }),
    );
    if (state.spectrum.payload !== lastSpectrum) {
      lastSpectrum = state.spectrum.payload;
      renderSpectrum(spectrumDom.body, state.spectrum.payload);
    }

    renderPanelChrome(sensitivityDom, state.sensitivity, healthOk, () =>
      store.update((s) => {
        s.sensitivity.error = null;
      }),
    );
    if (state.sensitivity.payload !== lastSensitivity) {
      lastSensitivity = state.sensitivity.payload;
      renderSensitivity(sensitivityDom.body, state.sensitivity.payload);
    }

    renderPanelChrome(simulationDom, state.simulation, healthOk, () =>
      store.update((s) => {
        s.simulation.error = null;
      }),
    );
    if (state.simulation.payload !== lastSimulation) {
      lastSimulation = state.simulation.payload;
      renderSimulation(simulationDom.body, state.simulation.payload, SIMULATION_FIT_WINDOW);
    }

    const exportable = exportableModes(state);
    for (const [mode, box] of checkboxes) {
      box.disabled = !exportable.includes(mode);
      box.checked = state.reportSelection.has(mode);
    }
    const empty = state.reportSelection.size === 0;
    exportJson.disabled = empty;
    exportHtml.disabled = empty;
  }

  store.subscribe(render);
  render(store.get());

  // ------------------------------------------------------------ startup

  void client.health().then(
    (payload) => {
      healthOk = true;
      health.className = "health ok";
      health.textContent = `service ${payload.version}`;
      render(store.get());
    },
    () => {
      healthOk = false;
      health.className = "health error";
      health.textContent = "service unreachable";
    },
  );

  void client.examples().then(
    (payload) => {
      examplesInfo = payload;
      exampleSelect.replaceChildren();
      for (const id of Object.keys(payload)) {
        const opt = document.createElement("option");
        opt.value = id;
        opt.textContent = id;
        exampleSelect.append(opt);
      }
      exampleSelect.value = store.get().system.exampleId;
      rebuildParamFields();
    },
    () => {
      // header already reports unreachability; the select stays empty
    },
  );
  store.subscribe(() => rebuildParamFields());

  return { store, client, explorer, root };
}

function activeSolution(state: SessionState): SolutionPayload | null {
  const payload = state.placement.payload;
  if (payload === null || state.placement.stale) {
    return null;
  }
  return payload.solutions[state.branchIndex] ?? null;
}

function labelled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.className = "field";
  const span = document.createElement("span");
  span.textContent = text;
  label.append(span, control);
  return label;
}

function panelDom(root: HTMLElement, id: string, titleText: string): PanelDom {
  const section = document.createElement("section");
  section.id = id;
  section.className = "panel";
  const head = document.createElement("div");
  head.className = "panel-head";
  const title = document.createElement("h2");
  title.textContent = titleText;
  const badge = document.createElement("span");
  badge.className = "badge stale hidden";
  badge.textContent = "stale";
  const spinner = document.createElement("span");
  spinner.className = "spinner hidden";
  spinner.textContent = "working…";
  head.append(title, badge, spinner);
  const banner = document.createElement("div");
  banner.className = "banner-area";
  const body = document.createElement("div");
  body.className = "panel-body";
  section.append(head, banner, body);
  root.append(section);
  return { section, badge, spinner, banner, body };
}

function renderPanelChrome(
  dom: PanelDom,
  panel: PanelState<unknown>,
  healthOk: boolean,
  dismiss: () => void,
): void {
  dom.badge.classList.toggle("hidden", !(panel.stale && panel.payload !== null));
  dom.spinner.classList.toggle("hidden", !(panel.pending && healthOk));
  dom.banner.replaceChildren();
  if (panel.error !== null) {
    dom.banner.append(bannerElement(panel.error, dismiss));
  }
}

/** Dismissible error banner showing the service's error code. */
function bannerElement(error: ApiErrorBody, dismiss: () => void): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "banner";
  const code = document.createElement("code");
  code.textContent = error.code;
  const text = document.createElement("span");
  text.textContent = ` ${error.message}`;
  const close = document.createElement("button");
  close.className = "banner-dismiss";
  close.textContent = "dismiss";
  close.addEventListener("click", dismiss);
  banner.append(code, text, close);
  return banner;
}

const mount = document.getElementById("app");
if (mount !== null) {
  const base =
    (globalThis as { DELAYLAB_API?: string }).DELAYLAB_API ?? "";
  initApp(mount, { client: new Client(base) });
}
