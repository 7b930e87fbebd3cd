import { describe, expect, it } from "vitest";

import { ApiError, Client, isAbort } from "../src/api.js";
import { loadFixture, MockService } from "./mock.js";

/** A fetch whose responses are released by hand, honoring abort signals. */
function gatedFetch() {
  const pending: Array<{
    path: string;
    release: (body: unknown) => void;
  }> = [];
  const impl: typeof fetch = (input, init) =>
    new Promise<Response>((resolve, reject) => {
      const path = typeof input === "string" ? input : input.toString();
      const signal = init?.signal;
      if (signal?.aborted) {
        reject(new DOMException("aborted", "AbortError"));
        return;
      }
      signal?.addEventListener("abort", () => {
        reject(new DOMException("aborted", "AbortError"));
      });
      pending.push({
        path,
        release: (body) =>
          resolve(
            new Response(JSON.stringify(body), {
              status: 200,
              headers: { "content-type": "application/json" },
            }),
          ),
      });
    });
  return { impl, pending };
}

describe("per-panel request slots", () => {
  it("aborts the in-flight request when the same panel asks again", async () => {
    const gate = gatedFetch();
    const client = new Client("", gate.impl);

    const first = client.controlMid({ a: [1, 0], m: 1, tau: 1 });
    const second = client.controlMid({ a: [1, 0], m: 1, tau: 1.2 });
    expect(gate.pending).toHaveLength(2);

    await expect(first).rejects.toSatisfy(isAbort);
    gate.pending[1].release({ solutions: [] });
    await expect(second).resolves.toEqual({ solutions: [] });
  });

  it("keeps requests for different panels independent", async () => {
    const gate = gatedFetch();
    const client = new Client("", gate.impl);

    const placement = client.controlMid({ a: [1, 0], m: 1, tau: 1 });
    const spectrum = client.spectrum({
      qp: { n: 2, m: 1, a: [1, 0], b: [0, 0], tau: 1 },
      window: { x_min: -4, x_max: 0.5, y_max: 8 },
    });
    expect(gate.pending).toHaveLength(2);

    gate.pending[0].release({ solutions: [] });
    gate.pending[1].release({
      window: { x_min: -4, x_max: 0.5, y_max: 8 },
      roots: [],
      abscissa: null,
      total_count: 0,
      certified: false,
      certified_count: 0,
    });
    await expect(placement).resolves.toEqual({ solutions: [] });
    await expect(spectrum).resolves.toMatchObject({ roots: [] });
  });
});

describe("error propagation", () => {
  it("surfaces the service's own error code and status", async () => {
    const mock = new MockService();
    mock.failNext("/api/v1/admissibility", 413, {
      code: "cap_exceeded",
      message: "grid too large",
    });
    const client = new Client("", mock.fetch);
    const err = await client
      .admissibility({ a: [1, 0], m: 1, s0_min: -3, tau_max: 2 })
      .then(
        () => null,
        (e: unknown) => e,
      );
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("cap_exceeded");
    expect((err as ApiError).status).toBe(413);
  });

  it("wraps non-JSON failures in a generic envelope", async () => {
    const client = new Client("", async () => new Response("boom", { status: 502 }));
    const err = await client.health().then(
      () => null,
      (e: unknown) => e,
    );
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("http_error");
  });
});

describe("report downloads", () => {
  it("returns the document body with its content type", async () => {
    const mock = new MockService();
    const client = new Client("", mock.fetch);
    const fixture = loadFixture("report_html");
    const download = await client.report(
      fixture.request.body as Parameters<Client["report"]>[0],
    );
    expect(download.contentType).toContain("text/html");
    expect(download.text).toContain("<html");
  });
});
