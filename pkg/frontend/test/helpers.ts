/** Shared scaffolding for component tests running under jsdom. */

import { Client } from "../src/api.js";
import { initApp, type AppHandles } from "../src/app.js";
import type { DownloadSink } from "../src/report.js";
import type { MockService } from "./mock.js";

/** Let queued promise chains and microtask-bound handlers drain. */
export async function settle(rounds = 6): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await new Promise((resolve) => {
      setTimeout(resolve, 0);
    });
  }
}

export interface CapturedDownload {
  filename: string;
  text: string;
  contentType: string;
}

export function captureDownloads(into: CapturedDownload[]): DownloadSink {
  return (filename, text, contentType) => {
    into.push({ filename, text, contentType });
  };
}

export async function mountApp(
  mock: MockService,
  download?: DownloadSink,
): Promise<AppHandles> {
  const root = document.createElement("div");
  document.body.append(root);
  const app = initApp(root, {
    client: new Client("", mock.fetch),
    download,
  });
  await settle();
  return app;
}

export function unmount(app: AppHandles): void {
  app.root.remove();
}

/** Dispatch a click at SVG-local coordinates (jsdom rects are zero-based). */
export function clickAt(element: Element, x: number, y: number): void {
  element.dispatchEvent(
    new MouseEvent("click", { clientX: x, clientY: y, bubbles: true }),
  );
}

export function textOf(root: ParentNode, selector: string): string {
  const node = root.querySelector(selector);
  if (node === null) {
    throw new Error(`missing element: ${selector}`);
  }
  return node.textContent ?? "";
}

export function setInput(root: ParentNode, selector: string, value: string): void {
  const node = root.querySelector(selector);
  if (!(node instanceof HTMLInputElement) && !(node instanceof HTMLSelectElement)) {
    throw new Error(`not an input: ${selector}`);
  }
  node.value = value;
  node.dispatchEvent(new Event("input", { bubbles: true }));
  node.dispatchEvent(new Event("change", { bubbles: true }));
}

export function click(root: ParentNode, selector: string): void {
  const node = root.querySelector(selector);
  if (node === null) {
    throw new Error(`missing element: ${selector}`);
  }
  (node as HTMLElement).click();
}
