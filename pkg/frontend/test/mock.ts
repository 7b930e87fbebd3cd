/**
 * Mocked service for component tests: a fetch-compatible function that
 * answers from captured request/response fixture pairs, so the UI runs a
 * complete loop against genuine payloads with no backend process.
 *
 * Fixtures live in ./fixtures and are regenerated against the real
 * service by scripts/capture_fixtures.py at the repository root; a request
 * is answered only when its body deep-equals the captured one, which makes
 * every successful mock round trip double as an assertion on the exact
 * request the client builds.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

export interface Fixture {
  request: { method: string; path: string; body?: unknown };
  response?: unknown;
  response_text?: string;
  content_type?: string;
}

const FIXTURE_NAMES = [
  "health",
  "examples",
  "adm_oscillator",
  "adm_oscillator_raw",
  "adm_pendulum",
  "cm_oscillator",
  "cm_pendulum",
  "spectrum_oscillator",
  "sensitivity_oscillator",
  "simulate_oscillator",
  "report_json",
  "report_html",
] as const;

export type FixtureName = (typeof FIXTURE_NAMES)[number];

export function loadFixture(name: FixtureName): Fixture {
  const path = fileURLToPath(new URL(`./fixtures/${name}.json`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf8")) as Fixture;
}

/** Exact structural equality; numbers must match bit-for-bit. */
export function deepEqual(a: unknown, b: unknown): boolean {
  if (Object.is(a, b)) {
    return true;
  }
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((v, i) => deepEqual(v, b[i]));
  }
  if (
    typeof a === "object" &&
    typeof b === "object" &&
    a !== null &&
    b !== null &&
    !Array.isArray(a) &&
    !Array.isArray(b)
  ) {
    const ka = Object.keys(a).sort();
    const kb = Object.keys(b).sort();
    return (
      deepEqual(ka, kb) &&
      ka.every((k) =>
        deepEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]),
      )
    );
  }
  return false;
}

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

interface InjectedFailure {
  status: number;
  body: unknown;
}

export class MockService {
  readonly calls: RecordedCall[] = [];
  private readonly fixtures: Fixture[];
  private readonly failures = new Map<string, InjectedFailure>();

  constructor(names: readonly FixtureName[] = FIXTURE_NAMES) {
    this.fixtures = names.map(loadFixture);
  }

  /** Make the next request to this path fail with the given envelope. */
  failNext(path: string, status: number, body: unknown): void {
    this.failures.set(path, { status, body });
  }

  callsTo(path: string): RecordedCall[] {
    return this.calls.filter((c) => c.path === path);
  }

  /** Drop-in replacement for fetch, bound to this mock. */
  readonly fetch = async (
    input: RequestInfo | URL,
    init?: RequestInit,
  ): Promise<Response> => {
    const path = typeof input === "string" ? input : input.toString();
    const method = (init?.method ?? "GET").toUpperCase();
    const body =
      init?.body === undefined ? undefined : (JSON.parse(String(init.body)) as unknown);
    this.throwIfAborted(init?.signal);
    this.calls.push({ method, path, body });

    const failure = this.failures.get(path);
    if (failure !== undefined) {
      this.failures.delete(path);
      return jsonResponse(failure.body, failure.status);
    }

    for (const fixture of this.fixtures) {
      if (fixture.request.method !== method || fixture.request.path !== path) {
        continue;
      }
      if (method !== "GET" && !deepEqual(fixture.request.body, body)) {
        continue;
      }
      if (fixture.response_text !== undefined) {
        return new Response(fixture.response_text, {
          status: 200,
          headers: { "content-type": fixture.content_type ?? "text/plain" },
        });
      }
      return jsonResponse(fixture.response, 200);
    }
    return jsonResponse(
      {
        code: "no_fixture",
        message: `no fixture for ${method} ${path} with body ${JSON.stringify(body)}`,
      },
      500,
    );
  };

  private throwIfAborted(signal: AbortSignal | null | undefined): void {
    if (signal?.aborted) {
      throw new DOMException("request aborted", "AbortError");
    }
  }
}

function jsonResponse(body: unknown, status: number): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
