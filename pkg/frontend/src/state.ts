/**
 * Client-side session state for the cockpit.
 *
 * One store holds everything the panels render from.  All mutation goes
 * through {@link Store.update}, which notifies subscribers exactly once per
 * update — so an input edit that has to flag every downstream panel stale
 * does it atomically: no subscriber can ever observe a half-invalidated
 * session.
 */

import type {
  AdmissibilityPayload,
  ApiErrorBody,
  ControlMidPayload,
  SensitivityPayload,
  SimulationPayload,
  SpectrumPayload,
} from "./api.js";

/** How the plant is specified: a catalog example or raw coefficients. */
export interface SystemInput {
  kind: "example" | "raw";
  exampleId: string;
  /** Physical-parameter overrides; empty means catalog defaults. */
  params: Record<string, number>;
  rawA: number[];
  rawM: number;
  /** Explored rectangle: s0 in [s0Min, 0], tau in (0, tauMax]. */
  s0Min: number;
  tauMax: number;
}

/** What one panel currently shows and whether it can be trusted. */
export interface PanelState<T> {
  payload: T | null;
  /** Inputs upstream changed since this payload was computed. */
  stale: boolean;
  pending: boolean;
  error: ApiErrorBody | null;
}

/** A point picked on an admissibility zero curve. */
export interface Selection {
  s0: number;
  tau: number;
}

export type ReportMode =
  | "ControlMID"
  | "Admissibility"
  | "Spectrum"
  | "Sensitivity"
  | "Simulation";

export interface SessionState {
  system: SystemInput;
  admissibility: PanelState<AdmissibilityPayload>;
  placement: PanelState<ControlMidPayload>;
  /** Curve point the last placement request was made for. */
  selected: Selection | null;
  /** Index into placement.payload.solutions of the highlighted branch. */
  branchIndex: number;
  spectrum: PanelState<SpectrumPayload>;
  sensitivity: PanelState<SensitivityPayload>;
  simulation: PanelState<SimulationPayload>;
  /** Sections ticked for export; only fresh panels may appear here. */
  reportSelection: Set<ReportMode>;
}

function emptyPanel<T>(): PanelState<T> {
  return { payload: null, stale: false, pending: false, error: null };
}

export function initialState(): SessionState {
  return {
    system: {
      kind: "example",
      exampleId: "oscillator",
      params: {},
      rawA: [1, 0],
      rawM: 1,
      s0Min: -3,
      tauMax: 2,
    },
    admissibility: emptyPanel(),
    placement: emptyPanel(),
    selected: null,
    branchIndex: 0,
    spectrum: emptyPanel(),
    sensitivity: emptyPanel(),
    simulation: emptyPanel(),
    reportSelection: new Set(),
  };
}

export type Listener = (state: SessionState) => void;

export class Store {
  private state: SessionState;
  private readonly listeners = new Set<Listener>();

  constructor(state: SessionState = initialState()) {
    this.state = state;
  }

  get(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Apply one mutation and notify subscribers once. */
  update(mutate: (state: SessionState) => void): void {
    mutate(this.state);
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }
}

/**
 * Record an edit to the system input.  Everything computed from the old
 * input is flagged stale, the curve selection is dropped (the explored
 * rectangle may change), and the report selection is emptied — all in a
 * single notification.
 */
export function editSystem(store: Store, patch: Partial<SystemInput>): void {
  store.update((s) => {
    Object.assign(s.system, patch);
    for (const panel of [
      s.admissibility,
      s.placement,
      s.spectrum,
      s.sensitivity,
      s.simulation,
    ]) {
      if (panel.payload !== null) {
        panel.stale = true;
      }
    }
    s.selected = null;
    s.branchIndex = 0;
    s.reportSelection.clear();
  });
}

/**
 * True when the point lies inside the rectangle the explorer displays.
 * Selections outside the displayed rectangle are never accepted.
 */
export function withinDisplayedRectangle(
  state: SessionState,
  point: Selection,
): boolean {
  const grid = state.admissibility.payload;
  if (grid === null || state.admissibility.stale) {
    return false;
  }
  const s0Lo = Math.min(...grid.s0_values);
  const s0Hi = Math.max(...grid.s0_values);
  const tauHi = Math.max(...grid.tau_values);
  return (
    point.s0 >= s0Lo && point.s0 <= s0Hi && point.tau > 0 && point.tau <= tauHi
  );
}

/**
 * Accept a curve point as the active selection.  Returns false (and leaves
 * the state untouched) when the point is outside the displayed rectangle.
 */
export function select(store: Store, point: Selection): boolean {
  if (!withinDisplayedRectangle(store.get(), point)) {
    return false;
  }
  store.update((s) => {
    s.selected = { ...point };
    s.branchIndex = 0;
  });
  return true;
}

const MODE_PANELS: Record<ReportMode, keyof SessionState> = {
  ControlMID: "placement",
  Admissibility: "admissibility",
  Spectrum: "spectrum",
  Sensitivity: "sensitivity",
  Simulation: "simulation",
};

/** Panels whose current payload is fresh enough to export. */
export function exportableModes(state: SessionState): ReportMode[] {
  const out: ReportMode[] = [];
  for (const mode of Object.keys(MODE_PANELS) as ReportMode[]) {
    const panel = state[MODE_PANELS[mode]] as PanelState<unknown>;
    if (panel.payload !== null && !panel.stale) {
      out.push(mode);
    }
  }
  return out;
}

/** Toggle a section in the report selection; stale sections are refused. */
export function toggleReportMode(store: Store, mode: ReportMode): boolean {
  if (
    !store.get().reportSelection.has(mode) &&
    !exportableModes(store.get()).includes(mode)
  ) {
    return false;
  }
  store.update((s) => {
    if (s.reportSelection.has(mode)) {
      s.reportSelection.delete(mode);
    } else {
      s.reportSelection.add(mode);
    }
  });
  return true;
}
