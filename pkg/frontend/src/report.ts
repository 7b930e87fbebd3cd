/**
 * Report assembly and export.  The selected sections are sent to the
 * service's report endpoint exactly as their panels received them; the
 * returned document (JSON or standalone HTML) is handed to the browser as
 * a download.  Saving as PDF goes through the HTML document: open it and
 * use the browser's print dialog — the app says so next to the buttons.
 */

import type { Client, ReportRequest } from "./api.js";
import type { ReportMode, SessionState } from "./state.js";

/** How a finished document leaves the app; injectable for tests. */
export type DownloadSink = (filename: string, content: string, contentType: string) => void;

/** Default sink: a blob URL clicked through a temporary anchor. */
export function blobDownload(filename: string, content: string, contentType: string): void {
  const blob = new Blob([content], { type: contentType });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  document.body.append(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

/**
 * Section payloads for the current selection, straight from the panels.
 * The placement section pairs the highlighted branch with the physical
 * gains the service attached to it, matching the report builder's input
 * shape; every other section forwards its panel payload unchanged.
 */
export function assemblePayloads(state: SessionState): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const mode of state.reportSelection) {
    switch (mode) {
      case "ControlMID": {
        const solution = state.placement.payload?.solutions[state.branchIndex];
        if (solution !== undefined) {
          out[mode] =
            solution.gains != null
              ? { placement: solution, gains: solution.gains }
              : { placement: solution };
        }
        break;
      }
      case "Admissibility":
        out[mode] = stripSystem(state.admissibility.payload);
        break;
      case "Spectrum":
        out[mode] = state.spectrum.payload;
        break;
      case "Sensitivity":
        out[mode] = state.sensitivity.payload;
        break;
      case "Simulation":
        out[mode] = state.simulation.payload;
        break;
    }
  }
  return out;
}

/** The report builder takes the grid itself; the system echo rides along
 * only for UI labelling and is not part of the section payload. */
function stripSystem(payload: unknown): unknown {
  if (payload === null || typeof payload !== "object") {
    return payload;
  }
  const { system: _system, ...rest } = payload as Record<string, unknown>;
  return rest;
}

export function reportRequest(
  state: SessionState,
  format: "json" | "html",
  title: string,
): ReportRequest {
  return {
    selection: [...state.reportSelection].sort(),
    payloads: assemblePayloads(state),
    format,
    title,
    timestamp: "",
  };
}

export interface ExportResult {
  filename: string;
  contentType: string;
}

/** Fetch the document for the current selection and hand it to the sink. */
export async function exportReport(
  client: Client,
  state: SessionState,
  format: "json" | "html",
  title: string,
  sink: DownloadSink,
): Promise<ExportResult> {
  const modes: ReportMode[] = [...state.reportSelection];
  if (modes.length === 0) {
    throw new Error("nothing selected for export");
  }
  const download = await client.report(reportRequest(state, format, title));
  const filename = format === "json" ? "design-report.json" : "design-report.html";
  sink(filename, download.text, download.contentType);
  return { filename, contentType: download.contentType };
}
