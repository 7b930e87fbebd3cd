import { describe, expect, it } from "vitest";

import type { AdmissibilityPayload } from "../src/api.js";
import type { AppHandles } from "../src/app.js";
import type { Selection } from "../src/state.js";
import {
  type CapturedDownload,
  captureDownloads,
  clickAt,
  click,
  mountApp,
  settle,
} from "./helpers.js";
import { MockService } from "./mock.js";

function nearestVertex(grid: AdmissibilityPayload, target: Selection): Selection {
  let best: Selection = { s0: NaN, tau: NaN };
  let bestD = Infinity;
  for (const curve of grid.curves) {
    for (const [s0, tau] of curve) {
      const d = (s0 - target.s0) ** 2 + (tau - target.tau) ** 2;
      if (d < bestD) {
        bestD = d;
        best = { s0, tau };
      }
    }
  }
  return best;
}

/** Enter the oscillator, map, and pick the design on the curve near (-1, 1). */
async function designOscillator(app: AppHandles): Promise<void> {
  click(app.root, "#map-button");
  await settle();
  const grid = app.store.get().admissibility.payload!;
  const target = nearestVertex(grid, { s0: -1, tau: 1 });
  const pixel = app.explorer.toPixel(target)!;
  clickAt(app.explorer.element, pixel[0], pixel[1]);
  await settle();
}

describe("report export", () => {
  it("export buttons stay disabled while nothing is selected", async () => {
    const mock = new MockService();
    const app = await mountApp(mock);
    const json = app.root.querySelector("#export-json") as HTMLButtonElement;
    const html = app.root.querySelector("#export-html") as HTMLButtonElement;
    expect(json.disabled).toBe(true);
    expect(html.disabled).toBe(true);

    await designOscillator(app);
    // panels are fresh but still nothing ticked
    expect(json.disabled).toBe(true);

    click(app.root, 'input[data-mode="ControlMID"]');
    expect(json.disabled).toBe(false);
    expect(html.disabled).toBe(false);
  });

  it("JSON export of the picked design carries the designed gain", async () => {
    const mock = new MockService();
    const downloads: CapturedDownload[] = [];
    const app = await mountApp(mock, captureDownloads(downloads));
    await designOscillator(app);

    click(app.root, 'input[data-mode="ControlMID"]');
    click(app.root, "#export-json");
    await settle();

    // the mock only answers the exact captured request body, so a download
    // proves the app assembled the report request correctly
    expect(downloads).toHaveLength(1);
    expect(downloads[0].filename).toBe("design-report.json");
    expect(downloads[0].text).toContain("-0.735759");
    const body = JSON.parse(downloads[0].text) as {
      sections: Array<{ title: string; rows: [string, unknown][] }>;
    };
    expect(body.sections).toHaveLength(1);
    const rows = new Map(body.sections[0].rows);
    expect(rows.get("b0")).toBe(-0.735759);
    expect(rows.get("beta")).toBe(-0.735759);
  });

  it("HTML export renders the same design as a printable document", async () => {
    const mock = new MockService();
    const downloads: CapturedDownload[] = [];
    const app = await mountApp(mock, captureDownloads(downloads));
    await designOscillator(app);

    click(app.root, 'input[data-mode="ControlMID"]');
    click(app.root, "#export-html");
    await settle();

    expect(downloads).toHaveLength(1);
    expect(downloads[0].filename).toBe("design-report.html");
    expect(downloads[0].contentType).toContain("text/html");
    expect(downloads[0].text).toContain("-0.7358");
    expect(mock.callsTo("/api/v1/report")).toHaveLength(1);
  });

  it("tells the user PDF goes through the browser's print dialog", async () => {
    const app = await mountApp(new MockService());
    expect(app.root.querySelector(".pdf-note")!.textContent).toContain("print to PDF");
  });

  it("surfaces report failures in a dismissible banner", async () => {
    const mock = new MockService();
    const downloads: CapturedDownload[] = [];
    const app = await mountApp(mock, captureDownloads(downloads));
    await designOscillator(app);
    click(app.root, 'input[data-mode="ControlMID"]');

    mock.failNext("/api/v1/report", 422, {
      code: "unknown_mode",
      message: "unsupported section",
    });
    click(app.root, "#export-json");
    await settle();

    expect(downloads).toHaveLength(0);
    const banner = app.root.querySelector("#report-panel .banner")!;
    expect(banner.textContent).toContain("unknown_mode");
    (banner.querySelector(".banner-dismiss") as HTMLButtonElement).click();
    expect(app.root.querySelector("#report-panel .banner")).toBeNull();
  });
});
